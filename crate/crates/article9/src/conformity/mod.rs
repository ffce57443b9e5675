//! Numbered Article 9 conformity rule suite.
//!
//! Each rule checks one requirement over the register and the recorded
//! process run, emitting findings with stable ids and message templates:
//!
//! | rule      | severity | requirement                                               |
//! |-----------|----------|-----------------------------------------------------------|
//! | R-9.1-EST | error    | risk management system documents are referenced           |
//! | R-9.1-MNT | error    | most recent review is within the review interval          |
//! | R-9.2-LCY | error    | development and pre-market iterations are both recorded   |
//! | R-9.2-PMM | error    | post-market hazards were evaluated by the process         |
//! | R-9.2-KNW | error    | known hazards cite incident or report evidence            |
//! | R-9.2-EFF | warning  | serious/catastrophic hazards list identification methods  |
//! | R-9.4-ACC | error    | the process terminated COMPLETE                           |
//! | R-9.4-COM | error    | accepted residual risks above de minimis are communicated |
//! | R-9.4-CTX | warning  | information measures come with a user profile             |
//! | R-9.5-TST | error    | at least one pre-market test record exists                |
//! | R-9.7-PRE | error    | test metrics were declared strictly before execution      |
//! | R-9.8-CHD | error    | child-accessible systems carry a children assessment      |
//! | R-9.9-CRD | error    | credit institutions state the integration point           |
//!
//! Rules never fail; they emit findings. Reports are deterministic:
//! identical inputs render byte-identical output.

mod render;

pub use render::{render_report, ReportFormat};
pub(crate) use render::process_summary_text;

use std::collections::BTreeMap;

use chrono::{Months, NaiveDate};

use crate::model::{EvidenceKind, MeasureClass, Origin, Register, Severity, Stage};
use crate::risk::{ProcessTrace, Terminal, VerdictSubject};
use crate::scope::ScopeDecision;
use crate::span::Span;

/// Stable rule identifiers; ids are never reused once published.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    R91Est,
    R91Mnt,
    R92Lcy,
    R92Pmm,
    R92Knw,
    R92Eff,
    R94Acc,
    R94Com,
    R94Ctx,
    R95Tst,
    R97Pre,
    R98Chd,
    R99Crd,
}

impl RuleId {
    pub const ALL: [RuleId; 13] = [
        RuleId::R91Est,
        RuleId::R91Mnt,
        RuleId::R92Lcy,
        RuleId::R92Pmm,
        RuleId::R92Knw,
        RuleId::R92Eff,
        RuleId::R94Acc,
        RuleId::R94Com,
        RuleId::R94Ctx,
        RuleId::R95Tst,
        RuleId::R97Pre,
        RuleId::R98Chd,
        RuleId::R99Crd,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RuleId::R91Est => "R-9.1-EST",
            RuleId::R91Mnt => "R-9.1-MNT",
            RuleId::R92Lcy => "R-9.2-LCY",
            RuleId::R92Pmm => "R-9.2-PMM",
            RuleId::R92Knw => "R-9.2-KNW",
            RuleId::R92Eff => "R-9.2-EFF",
            RuleId::R94Acc => "R-9.4-ACC",
            RuleId::R94Com => "R-9.4-COM",
            RuleId::R94Ctx => "R-9.4-CTX",
            RuleId::R95Tst => "R-9.5-TST",
            RuleId::R97Pre => "R-9.7-PRE",
            RuleId::R98Chd => "R-9.8-CHD",
            RuleId::R99Crd => "R-9.9-CRD",
        }
    }

    pub fn severity(&self) -> FindingSeverity {
        match self {
            // interpretive guidance, not bright-line requirements
            RuleId::R92Eff | RuleId::R94Ctx => FindingSeverity::Warning,
            _ => FindingSeverity::Error,
        }
    }
}

impl std::fmt::Display for RuleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FindingSeverity {
    Error,
    Warning,
}

impl FindingSeverity {
    pub fn as_str(&self) -> &'static str {
        match self {
            FindingSeverity::Error => "error",
            FindingSeverity::Warning => "warning",
        }
    }
}

/// One rule violation. Findings for absent elements anchor to the
/// document-start span; findings about a present element anchor to it.
#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub rule: RuleId,
    pub severity: FindingSeverity,
    pub message: String,
    pub span: Span,
}

/// Condensed view of a [`ProcessTrace`] for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSummary {
    pub terminal: Terminal,
    pub iterations: usize,
    pub overall_index: f64,
    pub per_hazard: BTreeMap<String, f64>,
}

impl ProcessSummary {
    pub fn from_trace(trace: &ProcessTrace) -> Self {
        let last = trace.final_iteration();
        let per_hazard = last
            .hazard_verdicts
            .iter()
            .filter_map(|v| {
                v.subject
                    .hazard_id()
                    .map(|id| (id.to_string(), v.value))
            })
            .collect();
        ProcessSummary {
            terminal: trace.terminal,
            iterations: trace.iterations.len(),
            overall_index: last.overall.value,
            per_hazard,
        }
    }
}

/// The aggregate machine-readable result of one conformity run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformityReport {
    pub version: &'static str,
    pub system_id: String,
    pub checked_at: NaiveDate,
    pub scope: ScopeDecision,
    pub process: ProcessSummary,
    pub findings: Vec<Finding>,
    pub conformant: bool,
}

/// Evaluates the full rule catalog. Deterministic: findings are sorted by
/// (rule id, span); `conformant` iff there are no error findings and the
/// process terminated COMPLETE. If scope says Article 9 does not apply the
/// rules still run — the report carries the scope decision so callers can
/// treat findings as advisory.
pub fn run_rules(
    register: &Register,
    trace: &ProcessTrace,
    scope: ScopeDecision,
    now: NaiveDate,
) -> ConformityReport {
    let mut findings: Vec<Finding> = Vec::new();
    let mut emit = |rule: RuleId, span: Span, message: String| {
        findings.push(Finding {
            rule,
            severity: rule.severity(),
            message,
            span,
        });
    };

    // R-9.1-EST: the written policies/procedures must be referenced.
    if register.system.rms_docs.is_empty() {
        emit(
            RuleId::R91Est,
            Span::DOCUMENT_START,
            "no risk management system documents are referenced (rms_docs is empty)".to_string(),
        );
    }

    // R-9.1-MNT: reviewed on a regular basis.
    match register.reviews.iter().max_by_key(|r| r.date) {
        None => emit(
            RuleId::R91Mnt,
            Span::DOCUMENT_START,
            "no review records exist; the risk management system must be reviewed regularly"
                .to_string(),
        ),
        Some(latest) => {
            let interval = register.policy.review_interval_months;
            let due = latest
                .date
                .checked_add_months(Months::new(interval))
                .expect("date arithmetic overflow");
            if due < now {
                emit(
                    RuleId::R91Mnt,
                    latest.span,
                    format!(
                        "most recent review ({}) is older than the review interval of {interval} months at {now}",
                        latest.date
                    ),
                );
            }
        }
    }

    // R-9.2-LCY: one development and one pre-market iteration at minimum.
    let has_dev = register
        .iterations
        .iter()
        .any(|i| i.stage == Stage::Development);
    let has_pre = register
        .iterations
        .iter()
        .any(|i| i.stage == Stage::PreMarket);
    if !has_dev || !has_pre {
        let missing = match (has_dev, has_pre) {
            (false, true) => "development",
            (true, false) => "pre_market",
            _ => "development and pre_market",
        };
        emit(
            RuleId::R92Lcy,
            Span::DOCUMENT_START,
            format!(
                "the process must record at least one development-stage and one pre-market iteration; missing: {missing}"
            ),
        );
    }

    // R-9.2-PMM: post-market hazards must have been evaluated.
    let evaluated: Vec<&str> = trace
        .final_iteration()
        .hazard_verdicts
        .iter()
        .filter_map(|v| v.subject.hazard_id())
        .collect();
    for hazard in &register.hazards {
        if hazard.origin == Origin::PostMarket && !evaluated.contains(&hazard.id.as_str()) {
            emit(
                RuleId::R92Pmm,
                hazard.span,
                format!(
                    "hazard `{}` (post-market origin) was not evaluated by the risk management process",
                    hazard.id
                ),
            );
        }
    }

    // R-9.2-KNW: known risks need incident or report evidence.
    for hazard in &register.hazards {
        if hazard.knowledge == crate::model::Knowledge::Known
            && !hazard
                .evidence
                .iter()
                .any(|e| matches!(e.kind, EvidenceKind::Incident | EvidenceKind::Report))
        {
            emit(
                RuleId::R92Knw,
                hazard.span,
                format!(
                    "hazard `{}` is marked known but lists no incident or report evidence",
                    hazard.id
                ),
            );
        }
    }

    // R-9.2-EFF: more effort for higher-impact hazards.
    for hazard in &register.hazards {
        if hazard.severity >= Severity::Serious && hazard.methods.is_empty() {
            emit(
                RuleId::R92Eff,
                hazard.span,
                format!(
                    "hazard `{}` is {} but lists no identification methods",
                    hazard.id, hazard.severity
                ),
            );
        }
    }

    // R-9.4-ACC: residual risk was reduced to an acceptable level.
    if trace.terminal == Terminal::Abort {
        emit(
            RuleId::R94Acc,
            Span::DOCUMENT_START,
            "risk management process terminated ABORT: residual risk could not be reduced to an acceptable level"
                .to_string(),
        );
    }

    // R-9.4-COM: accepted residual risks are communicated to the user.
    let final_verdicts: BTreeMap<&str, (bool, f64)> = trace
        .final_iteration()
        .hazard_verdicts
        .iter()
        .filter_map(|v| match &v.subject {
            VerdictSubject::Hazard(id) => Some((id.as_str(), (v.acceptable, v.value))),
            VerdictSubject::Overall => None,
        })
        .collect();
    for hazard in &register.hazards {
        let Some(&(accepted, residual)) = final_verdicts.get(hazard.id.as_str()) else {
            continue;
        };
        if !accepted || residual <= register.policy.de_minimis {
            continue;
        }
        let informed_by_measure = register.measures.iter().any(|m| {
            m.class == MeasureClass::Information
                && m.targets.contains(&hazard.id)
                && trace.total_adopted.contains(&m.id)
        });
        if !hazard.communicated && !informed_by_measure {
            emit(
                RuleId::R94Com,
                hazard.span,
                format!(
                    "hazard `{}` carries accepted residual risk above de minimis but is not communicated to the user",
                    hazard.id
                ),
            );
        }
    }

    // R-9.4-CTX: information measures presuppose knowing the user.
    let any_information = register
        .measures
        .iter()
        .any(|m| m.class == MeasureClass::Information);
    if any_information && register.system.user_profile.is_none() {
        emit(
            RuleId::R94Ctx,
            Span::DOCUMENT_START,
            "information measures exist but no user_profile is declared for the system"
                .to_string(),
        );
    }

    // R-9.5-TST: tested before placing on the market.
    if !register.tests.iter().any(|t| t.stage == Stage::PreMarket) {
        emit(
            RuleId::R95Tst,
            Span::DOCUMENT_START,
            "no pre-market test record exists; testing is required prior to placing on the market"
                .to_string(),
        );
    }

    // R-9.7-PRE: metrics and thresholds defined preliminarily.
    for test in &register.tests {
        if test.declared_at >= test.executed_at {
            emit(
                RuleId::R97Pre,
                test.span,
                format!(
                    "test `{}` metrics were not declared before execution (declared {}, executed {})",
                    test.id, test.declared_at, test.executed_at
                ),
            );
        }
    }

    // R-9.8-CHD: specific consideration for children.
    if register.system.likely_accessed_by_children && register.children_assessment.is_none() {
        emit(
            RuleId::R98Chd,
            Span::DOCUMENT_START,
            "system is likely to be accessed by children but no children_assessment is recorded"
                .to_string(),
        );
    }

    // R-9.9-CRD: part of the credit institution's risk management system.
    if register.provider.is_credit_institution && register.system.integrates_with.is_none() {
        emit(
            RuleId::R99Crd,
            Span::DOCUMENT_START,
            "provider is a credit institution but the register does not state how the system integrates with its risk management (integrates_with)"
                .to_string(),
        );
    }

    findings.sort_by(|a, b| {
        (a.rule.as_str(), a.span.offset, a.span.len).cmp(&(
            b.rule.as_str(),
            b.span.offset,
            b.span.len,
        ))
    });

    let has_errors = findings
        .iter()
        .any(|f| f.severity == FindingSeverity::Error);
    let conformant = !has_errors && trace.terminal == Terminal::Complete;

    ConformityReport {
        version: "1",
        system_id: register.system.id.clone(),
        checked_at: now,
        scope,
        process: ProcessSummary::from_trace(trace),
        findings,
        conformant,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::lower;
    use crate::risk::run_process;
    use crate::scope::{assess_scope, ScopeQuery};
    use crate::syntax::parse_source;

    const NOW: &str = "2025-06-01";

    fn base_register_src() -> String {
        r#"
provider "P" {
  established_in: "DE"
  turnover_eur: 1000000
}
policy {
  entry_into_force: 2023-03-01
}
system "s" {
  risk_class: minimal
  intended_purpose: "demo"
  rms_docs: ["DOC-1"]
}
test "t" {
  metric: "accuracy"
  threshold: 0.9
  declared_at: 2024-01-01
  executed_at: 2024-02-01
  stage: pre_market
  result: 0.95
  purpose: consistency
}
iteration {
  stage: development
  date: 2024-03-01
  outcome: acceptable
}
iteration {
  stage: pre_market
  date: 2024-06-01
  outcome: acceptable
}
review {
  date: 2025-01-15
  note: "annual"
}
"#
        .to_string()
    }

    fn report_for(src: &str) -> ConformityReport {
        let reg = lower(&parse_source(src).unwrap()).unwrap();
        let now = NOW.parse().unwrap();
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

    fn finding_rules(report: &ConformityReport) -> Vec<&'static str> {
        report.findings.iter().map(|f| f.rule.as_str()).collect()
    }

    #[test]
    fn clean_register_has_no_findings() {
        let report = report_for(&base_register_src());
        assert!(finding_rules(&report).is_empty());
        assert!(report.conformant);
    }

    #[test]
    fn missing_pre_market_test_triggers_tst_only() {
        let src = base_register_src().replace("stage: pre_market\n  result", "stage: development\n  result");
        let report = report_for(&src);
        assert_eq!(finding_rules(&report), vec!["R-9.5-TST"]);
        assert!(!report.conformant);
    }

    #[test]
    fn children_flag_without_assessment_triggers_chd() {
        let src = base_register_src().replace(
            "intended_purpose: \"demo\"",
            "intended_purpose: \"demo\"\n  likely_accessed_by_children: true",
        );
        let report = report_for(&src);
        assert_eq!(finding_rules(&report), vec!["R-9.8-CHD"]);
    }

    #[test]
    fn stale_review_anchors_to_the_review_span() {
        let src = base_register_src().replace("date: 2025-01-15", "date: 2023-01-15");
        let report = report_for(&src);
        assert_eq!(finding_rules(&report), vec!["R-9.1-MNT"]);
        assert_ne!(report.findings[0].span, Span::DOCUMENT_START);
    }

    #[test]
    fn equal_declare_execute_dates_trigger_pre() {
        let src = base_register_src().replace("executed_at: 2024-02-01", "executed_at: 2024-01-01");
        let report = report_for(&src);
        assert_eq!(finding_rules(&report), vec!["R-9.7-PRE"]);
    }

    #[test]
    fn warnings_do_not_break_conformance() {
        let src = base_register_src().replace(
            "review {",
            r#"measure "m-doc" {
  class: information
  targets: []
  adopt_order: 1
}
review {"#,
        );
        let report = report_for(&src);
        assert_eq!(finding_rules(&report), vec!["R-9.4-CTX"]);
        assert_eq!(report.findings[0].severity, FindingSeverity::Warning);
        assert!(report.conformant, "warnings alone must not break conformance");
    }

    #[test]
    fn findings_sort_by_rule_then_span() {
        // empty rms_docs (EST, doc start) + stale review (MNT, review span)
        // + missing pre-market test (TST, doc start)
        let src = base_register_src()
            .replace("  rms_docs: [\"DOC-1\"]\n", "")
            .replace("date: 2025-01-15", "date: 2023-01-15")
            .replace("stage: pre_market\n  result", "stage: development\n  result");
        let report = report_for(&src);
        assert_eq!(
            finding_rules(&report),
            vec!["R-9.1-EST", "R-9.1-MNT", "R-9.5-TST"]
        );
        let mut sorted = report.findings.clone();
        sorted.sort_by(|a, b| {
            (a.rule.as_str(), a.span.offset).cmp(&(b.rule.as_str(), b.span.offset))
        });
        assert_eq!(sorted, report.findings);
    }

    #[test]
    fn conformant_iff_no_errors_and_complete() {
        let report = report_for(&base_register_src());
        assert_eq!(
            report.conformant,
            report
                .findings
                .iter()
                .all(|f| f.severity != FindingSeverity::Error)
                && report.process.terminal == Terminal::Complete
        );
    }
}
