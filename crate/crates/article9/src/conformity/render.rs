//! Deterministic rendering of conformity reports.
//!
//! The machine format is UTF-8 JSON with a fixed top-level member order
//! (`version`, `system_id`, `checked_at`, `scope`, `process`, `findings`,
//! `conformant`), two-space indentation, and a trailing newline. Repeated
//! runs over identical inputs are byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use crate::conformity::{ConformityReport, ProcessSummary};
use crate::scope::{Prong, ScopeDecision};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Machine,
}

pub fn render_report(report: &ConformityReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => render_text(report),
        ReportFormat::Machine => render_machine(report),
    }
}

#[derive(Serialize)]
struct MachineReport<'a> {
    version: &'a str,
    system_id: &'a str,
    checked_at: String,
    scope: MachineScope<'a>,
    process: MachineProcess<'a>,
    findings: Vec<MachineFinding<'a>>,
    conformant: bool,
}

#[derive(Serialize)]
struct MachineScope<'a> {
    material: MachineProng<'a>,
    personal: MachineProng<'a>,
    regional: MachineProng<'a>,
    temporal: MachineProng<'a>,
}

#[derive(Serialize)]
struct MachineProng<'a> {
    holds: bool,
    reason: &'a str,
}

#[derive(Serialize)]
struct MachineProcess<'a> {
    terminal: String,
    iterations: usize,
    overall_index: f64,
    per_hazard: &'a BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct MachineFinding<'a> {
    rule: &'a str,
    severity: &'a str,
    message: &'a str,
    line: u32,
    column: u32,
}

fn prong<'a>(p: &'a Prong) -> MachineProng<'a> {
    MachineProng {
        holds: p.holds,
        reason: &p.reason,
    }
}

fn render_machine(report: &ConformityReport) -> String {
    let machine = MachineReport {
        version: report.version,
        system_id: &report.system_id,
        checked_at: report.checked_at.format("%Y-%m-%d").to_string(),
        scope: MachineScope {
            material: prong(&report.scope.material),
            personal: prong(&report.scope.personal),
            regional: prong(&report.scope.regional),
            temporal: prong(&report.scope.temporal),
        },
        process: MachineProcess {
            terminal: report.process.terminal.to_string(),
            iterations: report.process.iterations,
            overall_index: report.process.overall_index,
            per_hazard: &report.process.per_hazard,
        },
        findings: report
            .findings
            .iter()
            .map(|f| MachineFinding {
                rule: f.rule.as_str(),
                severity: f.severity.as_str(),
                message: &f.message,
                line: f.span.line,
                column: f.span.column,
            })
            .collect(),
        conformant: report.conformant,
    };
    let mut out = serde_json::to_string_pretty(&machine).expect("report serializes");
    out.push('\n');
    out
}

/// The process block is shared verbatim by the `check` summary and the
/// what-if simulation output.
pub(crate) fn process_summary_text(process: &ProcessSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "process: {} after {} iteration{}",
        process.terminal,
        process.iterations,
        if process.iterations == 1 { "" } else { "s" }
    );
    for (id, p) in &process.per_hazard {
        let _ = writeln!(out, "  {id}: residual {p}");
    }
    let _ = writeln!(out, "  overall index: {}", process.overall_index);
    out
}

fn scope_text(scope: &ScopeDecision) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "scope: {}",
        if scope.applies {
            "APPLIES"
        } else {
            "DOES NOT APPLY"
        }
    );
    for (name, p) in scope.prongs() {
        let _ = writeln!(
            out,
            "  {name}: {} - {}",
            if p.holds { "holds" } else { "fails" },
            p.reason
        );
    }
    out
}

fn render_text(report: &ConformityReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "article 9 conformity report");
    let _ = writeln!(out, "system: {}", report.system_id);
    let _ = writeln!(out, "checked: {}", report.checked_at.format("%Y-%m-%d"));
    out.push_str(&scope_text(&report.scope));
    out.push_str(&process_summary_text(&report.process));
    if report.findings.is_empty() {
        let _ = writeln!(out, "findings: none");
    } else {
        let _ = writeln!(out, "findings:");
        for f in &report.findings {
            let _ = writeln!(
                out,
                "  {} {} {} - {}",
                f.rule.as_str(),
                f.severity.as_str(),
                f.span,
                f.message
            );
        }
    }
    let _ = writeln!(
        out,
        "{}",
        if report.conformant {
            "CONFORMANT"
        } else {
            "NOT CONFORMANT"
        }
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformity::run_rules;
    use crate::model::lower;
    use crate::risk::run_process;
    use crate::scope::{assess_scope, ScopeQuery};
    use crate::syntax::parse_source;

    fn sample_report(findings_src: bool) -> ConformityReport {
        let src = format!(
            r#"
provider "P" {{
  established_in: "DE"
  turnover_eur: 1000000
}}
policy {{
  entry_into_force: 2023-03-01
}}
system "s" {{
  risk_class: minimal
  intended_purpose: "demo"
  {}
}}
test "t" {{
  metric: "accuracy"
  threshold: 0.9
  declared_at: 2024-01-01
  executed_at: 2024-02-01
  stage: pre_market
  result: 0.95
  purpose: consistency
}}
iteration {{
  stage: development
  date: 2024-03-01
  outcome: acceptable
}}
iteration {{
  stage: pre_market
  date: 2024-06-01
  outcome: acceptable
}}
review {{
  date: 2025-01-15
  note: "annual"
}}
"#,
            if findings_src { "" } else { "rms_docs: [\"DOC-1\"]" }
        );
        let reg = lower(&parse_source(&src).unwrap()).unwrap();
        let now = "2025-06-01".parse().unwrap();
        let trace = run_process(&reg);
        let scope = assess_scope(
            &reg,
            &ScopeQuery {
                check_date: now,
                entry_into_force: reg.policy.entry_into_force.unwrap(),
                regime: reg.policy.regime,
            },
        );
        run_rules(&reg, &trace, scope, now)
    }

    #[test]
    fn machine_report_has_documented_shape() {
        let json = render_report(&sample_report(false), ReportFormat::Machine);
        assert!(json.ends_with('\n'));
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["version"], "1");
        assert_eq!(value["system_id"], "s");
        assert_eq!(value["checked_at"], "2025-06-01");
        assert_eq!(value["findings"], serde_json::json!([]));
        assert_eq!(value["conformant"], true);
        assert_eq!(value["process"]["terminal"], "COMPLETE");
        assert_eq!(value["scope"]["material"]["holds"], false);
        // top-level key order is part of the format
        let order: Vec<usize> = [
            "\"version\"",
            "\"system_id\"",
            "\"checked_at\"",
            "\"scope\"",
            "\"process\"",
            "\"findings\"",
            "\"conformant\"",
        ]
        .iter()
        .map(|k| json.find(k).unwrap())
        .collect();
        let mut sorted = order.clone();
        sorted.sort_unstable();
        assert_eq!(order, sorted, "top-level keys out of documented order");
        // two-space indentation
        assert!(json.contains("\n  \"system_id\""));
    }

    #[test]
    fn rendering_is_deterministic() {
        let report = sample_report(true);
        assert_eq!(
            render_report(&report, ReportFormat::Machine),
            render_report(&report, ReportFormat::Machine)
        );
        assert_eq!(
            render_report(&report, ReportFormat::Text),
            render_report(&report, ReportFormat::Text)
        );
    }

    #[test]
    fn text_report_ends_with_verdict_line() {
        let clean = render_report(&sample_report(false), ReportFormat::Text);
        assert!(clean.trim_end().ends_with("CONFORMANT"));
        let dirty = render_report(&sample_report(true), ReportFormat::Text);
        assert!(dirty.trim_end().ends_with("NOT CONFORMANT"));
        assert!(dirty.contains("R-9.1-EST error 1:1"));
    }

    #[test]
    fn findings_carry_line_and_column_in_machine_format() {
        let json = render_report(&sample_report(true), ReportFormat::Machine);
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        let finding = &value["findings"][0];
        assert_eq!(finding["rule"], "R-9.1-EST");
        assert_eq!(finding["severity"], "error");
        assert_eq!(finding["line"], 1);
        assert_eq!(finding["column"], 1);
    }
}
