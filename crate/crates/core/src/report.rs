//! Report structures and rendering.
//!
//! Every report embeds the manifest of the run that produced it, so a report
//! can be reproduced byte-for-byte from its own header. Text rendering is
//! fully deterministic: fixed column widths, fixed decimal places, ordered
//! maps.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::bootstrap::BoundCi;
use crate::descriptives::{ArmSummary, QuartileTable, TestResult};
use crate::strata::{GammaRow, PrincipalBounds, StrataAnalysis};
use crate::study::StudyReport;
use crate::trial::Arm;

/// What produced a report: subcommand, input, seed, and flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub input_path: Option<String>,
    pub seed: Option<u64>,
    /// Flag values in deterministic (sorted) order.
    pub options: BTreeMap<String, String>,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            input_path: None,
            seed: None,
            options: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn with_input(mut self, path: Option<String>) -> Self {
        self.input_path = path;
        self
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_option(mut self, key: &str, value: impl ToString) -> Self {
        self.options.insert(key.to_string(), value.to_string());
        self
    }

    fn render(&self, out: &mut String) {
        let _ = writeln!(out, "# run: {} (v{})", self.subcommand, self.tool_version);
        if let Some(path) = &self.input_path {
            let _ = writeln!(out, "# input: {path}");
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "# seed: {seed}");
        }
        for (k, v) in &self.options {
            let _ = writeln!(out, "# {k}: {v}");
        }
    }
}

/// One pairwise test row in a describe report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestRow {
    pub metric: String,
    pub arm_a: Arm,
    pub arm_b: Arm,
    #[serde(flatten)]
    pub result: TestResult,
}

/// Output of the `describe` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescribeReport {
    pub manifest: RunManifest,
    pub summaries: Vec<ArmSummary>,
    pub tests: Vec<TestRow>,
    pub quartiles: Option<QuartileTable>,
}

impl DescribeReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        self.manifest.render(&mut out);

        let _ = writeln!(out, "\nArm summaries");
        let _ = writeln!(
            out,
            "  {:<20} {:<10} {:>5} {:>9} {:>9}",
            "metric", "arm", "n", "mean", "sd"
        );
        for s in &self.summaries {
            let sd = s
                .sd
                .map(|v| format!("{v:>9.3}"))
                .unwrap_or_else(|| format!("{:>9}", "-"));
            let _ = writeln!(
                out,
                "  {:<20} {:<10} {:>5} {:>9.3} {sd}",
                s.metric.name(),
                s.arm.label(),
                s.n,
                s.mean
            );
        }

        let _ = writeln!(out, "\nPairwise tests (effect = second arm minus first)");
        let _ = writeln!(
            out,
            "  {:<20} {:<22} {:>9} {:>9} {:>8} {:>9} {:<9}",
            "metric", "arms", "effect", "stat", "df", "p", "tail"
        );
        for t in &self.tests {
            let df = t
                .result
                .df
                .map(|v| format!("{v:>8.1}"))
                .unwrap_or_else(|| format!("{:>8}", "-"));
            let _ = writeln!(
                out,
                "  {:<20} {:<22} {:>9.3} {:>9.3} {df} {:>9.4} {:<9}",
                t.metric,
                format!("{} vs {}", t.arm_a.label(), t.arm_b.label()),
                t.result.effect,
                t.result.statistic,
                t.result.p_value,
                t.result.tail.label()
            );
        }

        if let Some(q) = &self.quartiles {
            let _ = writeln!(
                out,
                "\nAdoption by grade quartile (cuts at {:.2} / {:.2} / {:.2})",
                q.cuts[0], q.cuts[1], q.cuts[2]
            );
            let _ = writeln!(
                out,
                "  {:<9} {:<10} {:>9} {:>9}",
                "quartile", "arm", "rate", "users"
            );
            for cell in &q.cells {
                let rate = cell
                    .rate()
                    .map(|r| format!("{:>8.1}%", 100.0 * r))
                    .unwrap_or_else(|| format!("{:>9}", "-"));
                let _ = writeln!(
                    out,
                    "  Q{:<8} {:<10} {rate} {:>6}/{}",
                    cell.quartile,
                    cell.arm.label(),
                    cell.adopters,
                    cell.total
                );
            }
        }
        out
    }
}

/// Output of the `strata` / `sweep-gamma` / `bootstrap` subcommands.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrataReport {
    pub manifest: RunManifest,
    pub analysis: StrataAnalysis,
    pub cis: Option<Vec<BoundCi>>,
}

fn bound_cell(b: Option<PrincipalBounds>, pick_upper: bool) -> String {
    match b {
        Some(b) => {
            let v = if pick_upper { b.upper } else { b.lower };
            let clamped = if pick_upper { b.upper_clamped } else { b.lower_clamped };
            format!("{v:>8.3}{}", if clamped { "*" } else { " " })
        }
        None => format!("{:>9}", "-"),
    }
}

impl StrataReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        self.manifest.render(&mut out);
        let a = &self.analysis;

        let _ = writeln!(out, "\nStratum proportions");
        let _ = writeln!(out, "  always  (pi_A): {:>8.4}", a.proportions.pi_a);
        let _ = writeln!(out, "  induced (pi_C): {:>8.4}", a.proportions.pi_c);
        let _ = writeln!(out, "  never   (pi_N): {:>8.4}", a.proportions.pi_n);

        let _ = writeln!(out, "\nBaseline outcomes");
        let fmt_opt = |v: Option<f64>| {
            v.map(|x| format!("{x:>8.3}"))
                .unwrap_or_else(|| format!("{:>8}", "-"))
        };
        let _ = writeln!(
            out,
            "  E[Y(0,0) | never]:   {}",
            fmt_opt(a.baselines.never_baseline)
        );
        let _ = writeln!(
            out,
            "  E[Y(0,1) | always]:  {}",
            fmt_opt(a.baselines.always_baseline)
        );
        let _ = writeln!(
            out,
            "  E[Y(0,0) | induced]: {:>8.3}",
            a.baselines.induced_baseline
        );

        let _ = writeln!(out, "\nBounds under the support restriction only");
        let _ = writeln!(
            out,
            "  {:<15} {:>9} {:>9} {:>9}",
            "effect", "lower", "upper", "width"
        );
        for bounds in [a.sweep.support.adoption, a.sweep.support.effectiveness]
            .into_iter()
            .flatten()
        {
            let _ = writeln!(
                out,
                "  {:<15} {:>9.3} {:>9.3} {:>9.3}",
                bounds.effect.label(),
                bounds.lower,
                bounds.upper,
                bounds.upper - bounds.lower
            );
        }

        let _ = writeln!(out, "\nBounds by mean-dominance relaxation (* = support clamp binding)");
        let _ = writeln!(
            out,
            "  {:>7} {:>9} {:>9} {:>9} {:>9}",
            "gamma", "L_eff", "U_eff", "L_adopt", "U_adopt"
        );
        for row in &a.sweep.rows {
            let _ = writeln!(
                out,
                "  {:>7.3} {} {} {} {}",
                row.gamma,
                bound_cell(row.effectiveness, false),
                bound_cell(row.effectiveness, true),
                bound_cell(row.adoption, false),
                bound_cell(row.adoption, true),
            );
        }
        match a.sweep.crossover_gamma {
            Some(g) => {
                let _ = writeln!(out, "  crossover gamma*: {g:.3}");
            }
            None => {
                let _ = writeln!(out, "  crossover gamma*: none for gamma >= 0");
            }
        }

        if let Some(cis) = &self.cis {
            let _ = writeln!(out, "\nBootstrap confidence intervals (percentile on bounds)");
            let _ = writeln!(
                out,
                "  {:>7} {:<15} {:>9} {:>9} {:>24} {:>7}",
                "gamma", "effect", "lower", "upper", "ci", "failed"
            );
            for ci in cis {
                let _ = writeln!(
                    out,
                    "  {:>7.3} {:<15} {:>9.3} {:>9.3} {:>24} {:>7}",
                    ci.gamma,
                    ci.effect.label(),
                    ci.point_lower,
                    ci.point_upper,
                    format!("[{:.3}, {:.3}]", ci.lower_ci, ci.upper_ci),
                    ci.n_failed
                );
            }
        }
        out
    }

    /// Delimited (CSV) sweep table: one row per gamma plus the support row.
    pub fn render_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "gamma,l_eff,u_eff,l_adopt,u_adopt,l_eff_clamped,u_eff_clamped,l_adopt_clamped,u_adopt_clamped"
        );
        let mut write_row = |label: String, row: &GammaRow| {
            let eff = row.effectiveness;
            let adopt = row.adoption;
            let num = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
            let flag = |v: Option<bool>| v.map(|x| x.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{label},{},{},{},{},{},{},{},{}",
                num(eff.map(|b| b.lower)),
                num(eff.map(|b| b.upper)),
                num(adopt.map(|b| b.lower)),
                num(adopt.map(|b| b.upper)),
                flag(eff.map(|b| b.lower_clamped)),
                flag(eff.map(|b| b.upper_clamped)),
                flag(adopt.map(|b| b.lower_clamped)),
                flag(adopt.map(|b| b.upper_clamped)),
            );
        };
        for row in &self.analysis.sweep.rows {
            write_row(format!("{:.6}", row.gamma), row);
        }
        let support = &self.analysis.sweep.support;
        write_row(
            "support".to_string(),
            &GammaRow {
                gamma: f64::INFINITY,
                adoption: support.adoption,
                effectiveness: support.effectiveness,
            },
        );
        out
    }
}

/// Output of the `simulate` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateReport {
    pub manifest: RunManifest,
    pub study: StudyReport,
}

impl SimulateReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        self.manifest.render(&mut out);
        let s = &self.study;
        let _ = writeln!(out, "\nSimulation study");
        let _ = writeln!(out, "  trials:            {:>8}", s.trials);
        let _ = writeln!(out, "  usable trials:     {:>8}", s.usable_trials);
        let pct = |v: Option<f64>| {
            v.map(|x| format!("{:>7.1}%", 100.0 * x))
                .unwrap_or_else(|| format!("{:>8}", "-"))
        };
        let _ = writeln!(
            out,
            "  truth coverage (adoption bounds):      {}",
            pct(s.adoption_coverage)
        );
        let _ = writeln!(
            out,
            "  truth coverage (effectiveness bounds): {}",
            pct(s.effectiveness_coverage)
        );
        if let Some(bias) = s.pi_bias {
            let _ = writeln!(
                out,
                "  mean share bias (always/induced/never): {:+.4} / {:+.4} / {:+.4}",
                bias[0], bias[1], bias[2]
            );
        }
        out
    }
}

/// Serialize any report to pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(report: &T) -> crate::error::Result<String> {
    let mut s = serde_json::to_string_pretty(report)
        .map_err(|e| crate::error::Error::Validation(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}
