//! Trial records: the three-arm data model, the letter-grade scale, and
//! delimited-text ingestion with full validation.
//!
//! A dataset is immutable once loaded, so it can be shared read-only across
//! threads.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Assignment arm of the trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arm {
    /// Control: no assistant access.
    NoAi,
    /// Assistant access without the training intervention.
    AiOnly,
    /// Assistant access plus the training intervention.
    AiTrained,
}

impl Arm {
    pub const ALL: [Arm; 3] = [Arm::NoAi, Arm::AiOnly, Arm::AiTrained];

    /// Canonical file-format label.
    pub fn label(self) -> &'static str {
        match self {
            Arm::NoAi => "NoAI",
            Arm::AiOnly => "AIOnly",
            Arm::AiTrained => "AITrained",
        }
    }

    pub fn parse(s: &str) -> Option<Arm> {
        match s {
            "NoAI" => Some(Arm::NoAi),
            "AIOnly" => Some(Arm::AiOnly),
            "AITrained" => Some(Arm::AiTrained),
            _ => None,
        }
    }

    /// Arms with assistant access, i.e. those carrying an adoption flag.
    pub fn has_adoption_flag(self) -> bool {
        !matches!(self, Arm::NoAi)
    }
}

impl std::fmt::Display for Arm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Ordered letter-grade scale mapping letters to grade points.
#[derive(Debug, Clone, PartialEq)]
pub struct GradeScale {
    entries: Vec<(String, f64)>,
}

impl Default for GradeScale {
    /// The eleven-step scale from D = 1.0 to A+ = 4.3.
    fn default() -> Self {
        let entries = [
            ("D", 1.0),
            ("D+", 1.3),
            ("C-", 1.7),
            ("C", 2.0),
            ("C+", 2.3),
            ("B-", 2.7),
            ("B", 3.0),
            ("B+", 3.3),
            ("A-", 3.7),
            ("A", 4.0),
            ("A+", 4.3),
        ]
        .into_iter()
        .map(|(l, p)| (l.to_string(), p))
        .collect();
        GradeScale { entries }
    }
}

impl GradeScale {
    /// Build a scale from (letter, points) pairs, lowest first.
    pub fn new(entries: Vec<(String, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::validation("grade scale must not be empty"));
        }
        for pair in entries.windows(2) {
            if pair[1].1 <= pair[0].1 {
                return Err(Error::validation(format!(
                    "grade scale must be strictly increasing; `{}` ({}) does not exceed `{}` ({})",
                    pair[1].0, pair[1].1, pair[0].0, pair[0].1
                )));
            }
        }
        Ok(GradeScale { entries })
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    /// Grade points for a letter.
    pub fn points(&self, letter: &str) -> Result<f64> {
        self.entries
            .iter()
            .find(|(l, _)| l == letter)
            .map(|&(_, p)| p)
            .ok_or_else(|| Error::validation(format!("unknown letter grade `{letter}`")))
    }

    /// Letter for an on-grid point value.
    pub fn letter(&self, points: f64) -> Option<&str> {
        self.entries
            .iter()
            .find(|(_, p)| on_grid_eq(*p, points))
            .map(|(l, _)| l.as_str())
    }

    /// Whether `points` lies exactly on the grid.
    pub fn contains(&self, points: f64) -> bool {
        self.entries.iter().any(|(_, p)| on_grid_eq(*p, points))
    }

    /// Canonicalize an on-grid value to the stored grid constant.
    pub fn canonical(&self, points: f64) -> Option<f64> {
        self.entries
            .iter()
            .find(|(_, p)| on_grid_eq(*p, points))
            .map(|&(_, p)| p)
    }

    /// Clip to the support and snap to the nearest grid point (ties go low).
    pub fn snap(&self, y: f64) -> f64 {
        let (lo, hi) = self.support();
        let y = y.clamp(lo, hi);
        let mut best = self.entries[0].1;
        let mut best_dist = (y - best).abs();
        for &(_, p) in &self.entries[1..] {
            let d = (y - p).abs();
            if d < best_dist {
                best = p;
                best_dist = d;
            }
        }
        best
    }

    /// (lowest, highest) grade points on the scale.
    pub fn support(&self) -> (f64, f64) {
        (
            self.entries.first().unwrap().1,
            self.entries.last().unwrap().1,
        )
    }
}

/// Grid membership comparison, tolerant of decimal-parse rounding only.
fn on_grid_eq(grid: f64, value: f64) -> bool {
    (grid - value).abs() < 1e-9
}

/// Per-issue maximum rubric points. The per-issue split is configuration,
/// not a property of the data; only the sum is pinned by the grading scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rubric {
    pub max_scores: [u32; 4],
}

impl Default for Rubric {
    fn default() -> Self {
        Rubric {
            max_scores: [2, 2, 3, 5],
        }
    }
}

impl Rubric {
    pub fn total(&self) -> u32 {
        self.max_scores.iter().sum()
    }
}

/// Score for one of the four rubric issues.
///
/// `score` is `None` when the issue was not spotted at all, which is distinct
/// from a spotted issue scored zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueScore {
    /// Issue index, 1 through 4.
    pub issue_id: u8,
    pub spotted: bool,
    pub score: Option<u32>,
    pub max_score: u32,
}

impl IssueScore {
    fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.issue_id) {
            return Err(Error::validation(format!(
                "issue_id {} out of range 1..=4",
                self.issue_id
            )));
        }
        match (self.spotted, self.score) {
            (false, Some(_)) => Err(Error::validation(format!(
                "issue {}: score present for an unspotted issue (NA expected)",
                self.issue_id
            ))),
            (true, None) => Err(Error::validation(format!(
                "issue {}: spotted issue has no score",
                self.issue_id
            ))),
            (true, Some(s)) if s > self.max_score => Err(Error::validation(format!(
                "issue {}: score {} exceeds maximum {}",
                self.issue_id, s, self.max_score
            ))),
            _ => Ok(()),
        }
    }
}

/// One participant's row: assignment, adoption, rubric scores, text metrics,
/// and survey responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExamRecord {
    pub unit_id: String,
    pub arm: Arm,
    /// Self-reported assistant use; present exactly for the assistant arms.
    pub adopted: Option<bool>,
    pub issues: [IssueScore; 4],
    pub grade_point: f64,
    /// Raw answer text, when available. Not part of the file format; the
    /// derived `word_count` and `fk_grade` columns are.
    pub answer_text: Option<String>,
    pub word_count: u64,
    pub fk_grade: f64,
    /// Erroneous or omitted rule statements, one per issue, 0..=4.
    pub rule_misstatements: u32,
    /// Cited cases that do not exist.
    pub case_hallucinations: u32,
    /// Cited cases irrelevant to the argument they support.
    pub case_misstatements: u32,
    pub cases_cited: u32,
    /// Survey: should assistants be permitted (1-5)?
    pub permission: Option<u8>,
    /// Survey: would assistant access help (1-5)?
    pub helpfulness: Option<u8>,
    pub prior_llm_training: Option<bool>,
}

impl ExamRecord {
    /// Number of issues not spotted, 0..=4.
    pub fn issues_missed(&self) -> u32 {
        self.issues.iter().filter(|i| !i.spotted).count() as u32
    }

    /// Total rubric score; an unspotted issue contributes zero.
    pub fn total_score(&self) -> u32 {
        self.issues.iter().filter_map(|i| i.score).sum()
    }

    fn validate(&self, scale: &GradeScale, rubric: &Rubric) -> Result<()> {
        if self.arm.has_adoption_flag() != self.adopted.is_some() {
            return Err(Error::validation(format!(
                "unit `{}`: adoption flag must be present exactly for assistant arms (arm {})",
                self.unit_id, self.arm
            )));
        }
        if !scale.contains(self.grade_point) {
            return Err(Error::validation(format!(
                "unit `{}`: grade point {} is not on the grade grid",
                self.unit_id, self.grade_point
            )));
        }
        for (slot, issue) in self.issues.iter().enumerate() {
            issue.validate()?;
            if issue.issue_id != (slot + 1) as u8 {
                return Err(Error::validation(format!(
                    "unit `{}`: issue slot {} holds issue_id {}",
                    self.unit_id,
                    slot + 1,
                    issue.issue_id
                )));
            }
            if issue.max_score != rubric.max_scores[slot] {
                return Err(Error::validation(format!(
                    "unit `{}`: issue {} max {} differs from rubric max {}",
                    self.unit_id,
                    issue.issue_id,
                    issue.max_score,
                    rubric.max_scores[slot]
                )));
            }
        }
        if self.rule_misstatements > 4 {
            return Err(Error::validation(format!(
                "unit `{}`: rule_misstatements {} out of range 0..=4",
                self.unit_id, self.rule_misstatements
            )));
        }
        for (name, v) in [("permission", self.permission), ("helpfulness", self.helpfulness)] {
            if let Some(v) = v {
                if !(1..=5).contains(&v) {
                    return Err(Error::validation(format!(
                        "unit `{}`: {name} {v} out of range 1..=5",
                        self.unit_id
                    )));
                }
            }
        }
        if !self.fk_grade.is_finite() {
            return Err(Error::validation(format!(
                "unit `{}`: fk_grade is not finite",
                self.unit_id
            )));
        }
        Ok(())
    }
}

/// A validated, immutable collection of exam records.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDataset {
    records: Vec<ExamRecord>,
    support: (f64, f64),
}

impl TrialDataset {
    /// Validate records against the scale and rubric and assemble a dataset.
    pub fn new(records: Vec<ExamRecord>, scale: &GradeScale, rubric: &Rubric) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::validation("no records"));
        }
        let mut seen = std::collections::HashSet::new();
        for rec in &records {
            rec.validate(scale, rubric)?;
            if !seen.insert(rec.unit_id.clone()) {
                return Err(Error::validation(format!(
                    "duplicate unit_id `{}`",
                    rec.unit_id
                )));
            }
        }
        Ok(TrialDataset {
            records,
            support: scale.support(),
        })
    }

    pub fn records(&self) -> &[ExamRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Outcome support (lowest, highest grade point on the scale).
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn arm_records(&self, arm: Arm) -> impl Iterator<Item = &ExamRecord> {
        self.records.iter().filter(move |r| r.arm == arm)
    }

    pub fn arm_size(&self, arm: Arm) -> usize {
        self.arm_records(arm).count()
    }
}

/// Column order of the delimited-text schema.
pub const COLUMNS: [&str; 21] = [
    "unit_id",
    "arm",
    "adopted",
    "issue1_spotted",
    "issue2_spotted",
    "issue3_spotted",
    "issue4_spotted",
    "issue1_score",
    "issue2_score",
    "issue3_score",
    "issue4_score",
    "grade_point",
    "word_count",
    "fk_grade",
    "rule_misstatements",
    "case_hallucinations",
    "case_misstatements",
    "cases_cited",
    "permission",
    "helpfulness",
    "prior_llm_training",
];

/// Sentinel used for the score of an unspotted issue.
const NA: &str = "NA";

/// Load a dataset from a comma-separated file using the default rubric.
pub fn load_dataset(path: impl AsRef<Path>, scale: &GradeScale) -> Result<TrialDataset> {
    load_dataset_with(path, scale, &Rubric::default())
}

/// Load a dataset from a comma-separated file with an explicit rubric.
pub fn load_dataset_with(
    path: impl AsRef<Path>,
    scale: &GradeScale,
    rubric: &Rubric,
) -> Result<TrialDataset> {
    let file = std::fs::File::open(path)?;
    read_dataset(file, scale, rubric)
}

/// Parse a dataset from any reader.
pub fn read_dataset<R: Read>(reader: R, scale: &GradeScale, rubric: &Rubric) -> Result<TrialDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);

    let headers = rdr.headers()?.clone();
    let mut index = std::collections::HashMap::new();
    for (i, name) in headers.iter().enumerate() {
        index.insert(name.to_string(), i);
    }
    for col in COLUMNS {
        if !index.contains_key(col) {
            return Err(Error::validation(format!("missing column `{col}` in header")));
        }
    }
    for name in headers.iter() {
        if !COLUMNS.contains(&name) {
            return Err(Error::validation(format!("unknown column `{name}` in header")));
        }
    }

    let mut records = Vec::new();
    for (row_idx, row) in rdr.records().enumerate() {
        let row_no = row_idx + 1;
        let row = row?;
        let field = |name: &str| -> &str { row.get(index[name]).unwrap_or("") };

        let unit_id = field("unit_id").to_string();
        if unit_id.is_empty() {
            return Err(Error::parse(row_no, "unit_id", "must not be empty"));
        }
        let arm = Arm::parse(field("arm")).ok_or_else(|| {
            Error::parse(
                row_no,
                "arm",
                format!("`{}` is not one of NoAI, AIOnly, AITrained", field("arm")),
            )
        })?;
        let adopted = parse_opt_bool(field("adopted"))
            .map_err(|m| Error::parse(row_no, "adopted", m))?;
        if arm.has_adoption_flag() && adopted.is_none() {
            return Err(Error::parse(
                row_no,
                "adopted",
                format!("required for arm {arm}"),
            ));
        }
        if !arm.has_adoption_flag() && adopted.is_some() {
            return Err(Error::parse(row_no, "adopted", "must be empty for arm NoAI"));
        }

        let mut issues = [IssueScore {
            issue_id: 0,
            spotted: false,
            score: None,
            max_score: 0,
        }; 4];
        for k in 0..4 {
            let spotted_col = format!("issue{}_spotted", k + 1);
            let score_col = format!("issue{}_score", k + 1);
            let spotted = parse_bool(field(&spotted_col))
                .map_err(|m| Error::parse(row_no, &spotted_col, m))?;
            let raw_score = field(&score_col);
            let score = if spotted {
                if raw_score == NA {
                    return Err(Error::parse(
                        row_no,
                        &score_col,
                        "spotted issue must carry a numeric score, not NA",
                    ));
                }
                Some(
                    raw_score
                        .parse::<u32>()
                        .map_err(|_| Error::parse(row_no, &score_col, "expected an integer"))?,
                )
            } else {
                if raw_score != NA {
                    return Err(Error::parse(
                        row_no,
                        &score_col,
                        format!("unspotted issue must be NA, got `{raw_score}`"),
                    ));
                }
                None
            };
            issues[k] = IssueScore {
                issue_id: (k + 1) as u8,
                spotted,
                score,
                max_score: rubric.max_scores[k],
            };
        }

        let grade_raw: f64 = field("grade_point")
            .parse()
            .map_err(|_| Error::parse(row_no, "grade_point", "expected a number"))?;
        let grade_point = scale.canonical(grade_raw).ok_or_else(|| {
            Error::parse(
                row_no,
                "grade_point",
                format!("{grade_raw} is not on the grade grid"),
            )
        })?;

        let record = ExamRecord {
            unit_id,
            arm,
            adopted,
            issues,
            grade_point,
            answer_text: None,
            word_count: parse_num(field("word_count"))
                .map_err(|m| Error::parse(row_no, "word_count", m))?,
            fk_grade: field("fk_grade")
                .parse()
                .map_err(|_| Error::parse(row_no, "fk_grade", "expected a number"))?,
            rule_misstatements: parse_num(field("rule_misstatements"))
                .map_err(|m| Error::parse(row_no, "rule_misstatements", m))?,
            case_hallucinations: parse_num(field("case_hallucinations"))
                .map_err(|m| Error::parse(row_no, "case_hallucinations", m))?,
            case_misstatements: parse_num(field("case_misstatements"))
                .map_err(|m| Error::parse(row_no, "case_misstatements", m))?,
            cases_cited: parse_num(field("cases_cited"))
                .map_err(|m| Error::parse(row_no, "cases_cited", m))?,
            permission: parse_opt_num(field("permission"))
                .map_err(|m| Error::parse(row_no, "permission", m))?,
            helpfulness: parse_opt_num(field("helpfulness"))
                .map_err(|m| Error::parse(row_no, "helpfulness", m))?,
            prior_llm_training: parse_opt_bool(field("prior_llm_training"))
                .map_err(|m| Error::parse(row_no, "prior_llm_training", m))?,
        };
        records.push(record);
    }

    TrialDataset::new(records, scale, rubric)
}

/// Write a dataset back out in the canonical column order.
pub fn write_dataset<W: Write>(dataset: &TrialDataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(COLUMNS)?;
    for rec in dataset.records() {
        let mut row: Vec<String> = Vec::with_capacity(COLUMNS.len());
        row.push(rec.unit_id.clone());
        row.push(rec.arm.label().to_string());
        row.push(opt_bool_str(rec.adopted));
        for issue in &rec.issues {
            row.push(issue.spotted.to_string());
        }
        for issue in &rec.issues {
            row.push(match issue.score {
                Some(s) => s.to_string(),
                None => NA.to_string(),
            });
        }
        row.push(format!("{:.1}", rec.grade_point));
        row.push(rec.word_count.to_string());
        row.push(rec.fk_grade.to_string());
        row.push(rec.rule_misstatements.to_string());
        row.push(rec.case_hallucinations.to_string());
        row.push(rec.case_misstatements.to_string());
        row.push(rec.cases_cited.to_string());
        row.push(rec.permission.map(|v| v.to_string()).unwrap_or_default());
        row.push(rec.helpfulness.map(|v| v.to_string()).unwrap_or_default());
        row.push(opt_bool_str(rec.prior_llm_training));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        other => Err(format!("`{other}` is not a boolean (true/false/1/0)")),
    }
}

fn parse_opt_bool(s: &str) -> std::result::Result<Option<bool>, String> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_bool(s).map(Some)
    }
}

fn parse_num<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse()
        .map_err(|_| format!("`{s}` is not a valid nonnegative integer"))
}

fn parse_opt_num<T: std::str::FromStr>(s: &str) -> std::result::Result<Option<T>, String> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_num(s).map(Some)
    }
}

fn opt_bool_str(v: Option<bool>) -> String {
    v.map(|b| b.to_string()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row(unit: &str, arm: &str, adopted: &str, gp: &str) -> String {
        format!(
            "{unit},{arm},{adopted},true,true,false,true,1,2,NA,4,{gp},850,12.1,2,0,0,5,3,4,false"
        )
    }

    fn header() -> String {
        COLUMNS.join(",")
    }

    #[test]
    fn grade_scale_table() {
        let scale = GradeScale::default();
        assert_eq!(scale.points("B-").unwrap(), 2.7);
        assert_eq!(scale.points("D").unwrap(), 1.0);
        assert_eq!(scale.points("A+").unwrap(), 4.3);
        assert!(scale.points("E").is_err());
        assert_eq!(scale.support(), (1.0, 4.3));
    }

    #[test]
    fn grade_scale_round_trips() {
        let scale = GradeScale::default();
        for (letter, points) in scale.entries() {
            assert_eq!(scale.letter(*points), Some(letter.as_str()));
            assert_eq!(scale.points(letter).unwrap(), *points);
        }
    }

    #[test]
    fn snap_clips_and_ties_low() {
        let scale = GradeScale::default();
        assert_eq!(scale.snap(0.2), 1.0);
        assert_eq!(scale.snap(9.9), 4.3);
        assert_eq!(scale.snap(2.1), 2.0); // midpoint of 2.0/2.3 is 2.15
        assert_eq!(scale.snap(2.2), 2.3);
        assert_eq!(scale.snap(2.15), 2.0); // tie goes to the lower point
    }

    #[test]
    fn loads_valid_rows() {
        let csv = format!(
            "{}\n{}\n{}\n{}\n",
            header(),
            sample_row("u1", "NoAI", "", "2.3"),
            sample_row("u2", "AIOnly", "true", "3.0"),
            sample_row("u3", "AITrained", "false", "1.0"),
        );
        let ds = read_dataset(csv.as_bytes(), &GradeScale::default(), &Rubric::default()).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.arm_size(Arm::NoAi), 1);
        assert_eq!(ds.records()[1].adopted, Some(true));
        assert_eq!(ds.records()[0].issues_missed(), 1);
        assert_eq!(ds.records()[0].total_score(), 7);
        assert_eq!(ds.support(), (1.0, 4.3));
    }

    #[test]
    fn empty_file_is_no_records() {
        let csv = format!("{}\n", header());
        let err = read_dataset(csv.as_bytes(), &GradeScale::default(), &Rubric::default())
            .unwrap_err();
        assert!(err.to_string().contains("no records"), "{err}");
    }

    #[test]
    fn off_grid_grade_is_rejected_with_location() {
        let csv = format!(
            "{}\n{}\n",
            header(),
            sample_row("u1", "NoAI", "", "2.5"),
        );
        let err = read_dataset(csv.as_bytes(), &GradeScale::default(), &Rubric::default())
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 1") && msg.contains("grade_point"), "{msg}");
    }

    #[test]
    fn missing_adoption_flag_for_ai_arm() {
        let csv = format!(
            "{}\n{}\n",
            header(),
            sample_row("u1", "AIOnly", "", "2.3"),
        );
        let err = read_dataset(csv.as_bytes(), &GradeScale::default(), &Rubric::default())
            .unwrap_err();
        assert!(err.to_string().contains("adopted"), "{err}");
    }

    #[test]
    fn na_is_distinct_from_zero() {
        // Spotted issue scored 0 is valid; unspotted issue with 0 is not.
        let good = format!(
            "{}\nu1,NoAI,,true,true,false,true,0,2,NA,4,2.3,850,12.1,2,0,0,5,,,\n",
            header()
        );
        let ds = read_dataset(good.as_bytes(), &GradeScale::default(), &Rubric::default()).unwrap();
        assert_eq!(ds.records()[0].issues[0].score, Some(0));
        assert_eq!(ds.records()[0].total_score(), 6);

        let bad = format!(
            "{}\nu1,NoAI,,true,true,false,true,0,2,0,4,2.3,850,12.1,2,0,0,5,,,\n",
            header()
        );
        let err = read_dataset(bad.as_bytes(), &GradeScale::default(), &Rubric::default())
            .unwrap_err();
        assert!(err.to_string().contains("issue3_score"), "{err}");
    }

    #[test]
    fn duplicate_unit_ids_rejected() {
        let csv = format!(
            "{}\n{}\n{}\n",
            header(),
            sample_row("u1", "NoAI", "", "2.3"),
            sample_row("u1", "AIOnly", "true", "3.0"),
        );
        let err = read_dataset(csv.as_bytes(), &GradeScale::default(), &Rubric::default())
            .unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn score_above_rubric_max_rejected() {
        let csv = format!(
            "{}\nu1,NoAI,,true,true,false,true,3,2,NA,4,2.3,850,12.1,2,0,0,5,,,\n",
            header()
        );
        let err = read_dataset(csv.as_bytes(), &GradeScale::default(), &Rubric::default())
            .unwrap_err();
        assert!(err.to_string().contains("exceeds maximum"), "{err}");
    }

    #[test]
    fn round_trip_preserves_records() {
        let csv = format!(
            "{}\n{}\n{}\n",
            header(),
            sample_row("u1", "AIOnly", "true", "2.7"),
            sample_row("u2", "AITrained", "false", "4.3"),
        );
        let scale = GradeScale::default();
        let rubric = Rubric::default();
        let ds = read_dataset(csv.as_bytes(), &scale, &rubric).unwrap();
        let mut out = Vec::new();
        write_dataset(&ds, &mut out).unwrap();
        let ds2 = read_dataset(out.as_slice(), &scale, &rubric).unwrap();
        assert_eq!(ds, ds2);
    }
}
