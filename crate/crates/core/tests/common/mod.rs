//! Shared fixtures: a fully specified synthetic trial whose arm sizes,
//! adoption counts, and quartile cells match the reference trial's reported
//! cross-tabs, plus the reconstruction of that trial's conditional means
//! from its published aggregates.

use strata_core::strata::{OutcomeSupport, StrataInput};
use strata_core::trial::{Arm, ExamRecord, GradeScale, IssueScore, Rubric, TrialDataset};

/// Grade-point multiset of one fixture cell: `(grade, count, adopters)` are
/// expanded into records with the first `adopters` units flagged as users.
struct Cell {
    arm: Arm,
    grades: &'static [(f64, usize)],
    adopters: usize,
}

fn push_cell(records: &mut Vec<ExamRecord>, cell: &Cell, rubric: &Rubric) {
    let start = records.len();
    let mut emitted = 0;
    for &(grade, count) in cell.grades {
        for _ in 0..count {
            let adopted = match cell.arm {
                Arm::NoAi => None,
                _ => Some(emitted < cell.adopters),
            };
            records.push(fixture_record(
                &format!("u{:04}", start + emitted),
                cell.arm,
                adopted,
                grade,
                rubric,
            ));
            emitted += 1;
        }
    }
    assert!(emitted >= cell.adopters);
}

pub fn fixture_record(
    unit: &str,
    arm: Arm,
    adopted: Option<bool>,
    grade_point: f64,
    rubric: &Rubric,
) -> ExamRecord {
    let frac = (grade_point - 1.0) / 3.3;
    let mut issues = [IssueScore { issue_id: 0, spotted: false, score: None, max_score: 0 }; 4];
    for (k, slot) in issues.iter_mut().enumerate() {
        let spotted = frac >= 0.2 * k as f64;
        *slot = IssueScore {
            issue_id: (k + 1) as u8,
            spotted,
            score: spotted.then(|| (frac * rubric.max_scores[k] as f64).round() as u32),
            max_score: rubric.max_scores[k],
        };
    }
    ExamRecord {
        unit_id: unit.to_string(),
        arm,
        adopted,
        issues,
        grade_point,
        answer_text: None,
        word_count: (600.0 + 500.0 * frac).round() as u64,
        fk_grade: 10.5 + 3.5 * frac,
        rule_misstatements: ((1.0 - frac) * 4.0).round() as u32,
        case_hallucinations: 0,
        case_misstatements: if frac < 0.3 { 1 } else { 0 },
        cases_cited: (3.0 + 5.0 * frac).round() as u32,
        permission: Some(1 + (frac * 4.0).round() as u8),
        helpfulness: Some(1 + ((1.0 - frac) * 4.0).round() as u8),
        prior_llm_training: Some(false),
    }
}

/// A 164-record trial: arms sized 49/57/58, assistant-arm adoption counts
/// 15 and 24, and grade points arranged so the pooled assistant-arm
/// quartile cuts land at 1.7 / 2.3 / 3.0 with the reference cross-tab's
/// cell counts and adopters per cell.
pub fn reference_fixture() -> TrialDataset {
    let rubric = Rubric::default();
    let mut records = Vec::with_capacity(164);

    // Control arm: 49 units spread over the grid.
    let control = Cell {
        arm: Arm::NoAi,
        grades: &[
            (1.0, 5),
            (1.3, 5),
            (1.7, 6),
            (2.0, 6),
            (2.3, 7),
            (2.7, 6),
            (3.0, 5),
            (3.3, 4),
            (3.7, 3),
            (4.0, 1),
            (4.3, 1),
        ],
        adopters: 0,
    };
    push_cell(&mut records, &control, &rubric);

    // Assistant arm without training: quartile cells 18/18/15/6 with
    // 6/3/6/0 adopters.
    for cell in [
        Cell { arm: Arm::AiOnly, grades: &[(1.0, 6), (1.3, 6), (1.7, 6)], adopters: 6 },
        Cell { arm: Arm::AiOnly, grades: &[(2.0, 8), (2.3, 10)], adopters: 3 },
        Cell { arm: Arm::AiOnly, grades: &[(2.7, 7), (3.0, 8)], adopters: 6 },
        Cell { arm: Arm::AiOnly, grades: &[(3.3, 4), (3.7, 2)], adopters: 0 },
    ] {
        push_cell(&mut records, &cell, &rubric);
    }

    // Assistant arm with training: quartile cells 13/16/17/12 with
    // 5/7/7/5 adopters.
    for cell in [
        Cell { arm: Arm::AiTrained, grades: &[(1.0, 5), (1.3, 4), (1.7, 4)], adopters: 5 },
        Cell { arm: Arm::AiTrained, grades: &[(2.0, 6), (2.3, 10)], adopters: 7 },
        Cell { arm: Arm::AiTrained, grades: &[(2.7, 8), (3.0, 9)], adopters: 7 },
        Cell {
            arm: Arm::AiTrained,
            grades: &[(3.3, 6), (3.7, 3), (4.0, 2), (4.3, 1)],
            adopters: 5,
        },
    ] {
        push_cell(&mut records, &cell, &rubric);
    }

    let dataset = TrialDataset::new(records, &GradeScale::default(), &rubric).unwrap();
    assert_eq!(dataset.arm_size(Arm::NoAi), 49);
    assert_eq!(dataset.arm_size(Arm::AiOnly), 57);
    assert_eq!(dataset.arm_size(Arm::AiTrained), 58);
    dataset
}

/// The reference trial's published aggregates used by the reconstruction.
pub struct ReferenceAggregates {
    pub untrained_arm_mean: f64,
    pub trained_arm_mean: f64,
    pub effectiveness_lower: f64,
    pub effectiveness_upper_at_zero: f64,
    pub adoption_lower_at_zero: f64,
}

pub const REFERENCE_AGGREGATES: ReferenceAggregates = ReferenceAggregates {
    untrained_arm_mean: 2.251,
    trained_arm_mean: 2.521,
    effectiveness_lower: -1.093,
    effectiveness_upper_at_zero: 0.419,
    adoption_lower_at_zero: 1.059,
};

/// Cell means reconstructed from the published aggregates, plus the
/// consistency gate: how far the implied trained-arm mean sits from the
/// reported one.
pub struct Reconstruction {
    pub input: StrataInput,
    pub gate_error: f64,
    pub induced_baseline_target: f64,
}

/// Solve the linear system linking the reported arm means, use counts, and
/// published bound values for the four unreported cell means.
///
/// The trained-cell mean and the induced baseline come from the reported
/// gamma-zero bounds; the untrained non-user mean comes from the untrained
/// arm mean; the trained non-user mean follows by inverting the
/// never/induced mixture. The reconstruction is only trusted if it
/// reproduces the reported trained-arm mean (the gate).
pub fn reconstructed_reference_input() -> Reconstruction {
    let agg = &REFERENCE_AGGREGATES;
    let support = OutcomeSupport::new(1.0, 4.3).unwrap();
    let (n0, a0, n1, a1) = (57.0_f64, 15.0_f64, 58.0_f64, 24.0_f64);

    // Always-user baseline from the support-only effectiveness lower bound.
    let mean_z0_d1 = support.y_min - agg.effectiveness_lower; // 2.093
    // Untrained non-user mean from the untrained arm mean.
    let mean_z0_d0 = (n0 * agg.untrained_arm_mean - a0 * mean_z0_d1) / (n0 - a0);
    // Trained user-cell mean from the gamma-zero effectiveness upper bound.
    let mean_z1_d1 = mean_z0_d1 + agg.effectiveness_upper_at_zero; // 2.512
    // Induced baseline from the gamma-zero adoption lower bound.
    let induced_baseline = mean_z1_d1 - agg.adoption_lower_at_zero; // 1.453
    // Trained non-user mean by inverting the never/induced mixture.
    let pi_n = (n1 - a1) / n1;
    let untreated_nonuse = (n0 - a0) / n0;
    let w_n = pi_n / untreated_nonuse;
    let w_c = 1.0 - w_n;
    let mean_z1_d0 = (mean_z0_d0 - w_c * induced_baseline) / w_n;

    let implied_trained_arm_mean = (a1 * mean_z1_d1 + (n1 - a1) * mean_z1_d0) / n1;
    let gate_error = (implied_trained_arm_mean - agg.trained_arm_mean).abs();

    let input = StrataInput::from_summary(
        57,
        15,
        58,
        24,
        mean_z0_d0,
        mean_z0_d1,
        mean_z1_d0,
        mean_z1_d1,
        support,
    )
    .unwrap();
    Reconstruction {
        input,
        gate_error,
        induced_baseline_target: induced_baseline,
    }
}
