//! Full pipeline: parse, lower, scope, process, rules, and both report
//! formats.
//!
//! Run with: cargo run -p article9 --example conformity_report

use article9::conformity::{render_report, run_rules, ReportFormat};
use article9::model::lower;
use article9::risk::run_process;
use article9::scope::{assess_scope, ScopeQuery};
use article9::syntax::parse_source;

const REGISTER: &str = r#"
provider "Demo Labs" {
  established_in: "DE"
  turnover_eur: 5000000
}

policy {
  entry_into_force: 2023-03-01
}

system "demo-1" {
  risk_class: high_risk
  annex3_category: "employment"
  intended_purpose: "Score applications for manual review"
  placed_on_eu_market: true
  rms_docs: ["RMS-01"]
  likely_accessed_by_children: true
}

hazard "hz-err" {
  description: "Occasional scoring errors"
  dimension: fundamental_rights
  origin: intended_use
  knowledge: foreseeable
  severity: moderate
  exposure: 0.5
  occurrence: 0.02
  avoidance_failure: 0.8
  methods: ["error analysis"]
  communicated: true
}

test "t-acc" {
  metric: "accuracy"
  threshold: 0.9
  declared_at: 2024-06-01
  executed_at: 2024-07-01
  stage: pre_market
  result: 0.94
  purpose: consistency
}

iteration {
  stage: development
  date: 2024-05-01
  outcome: acceptable
}

iteration {
  stage: pre_market
  date: 2024-08-01
  outcome: acceptable
}

review {
  date: 2025-01-15
  note: "annual review"
}
"#;

fn main() {
    let register = lower(&parse_source(REGISTER).unwrap()).unwrap();
    let now = "2025-06-01".parse().unwrap();
    let trace = run_process(&register);
    let scope = assess_scope(
        &register,
        &ScopeQuery {
            check_date: now,
            entry_into_force: register.policy.entry_into_force.unwrap(),
            regime: register.policy.regime,
        },
    );
    // the children flag without an assessment block will surface as a finding
    let report = run_rules(&register, &trace, scope, now);

    println!("--- text ---");
    print!("{}", render_report(&report, ReportFormat::Text));
    println!("--- machine ---");
    print!("{}", render_report(&report, ReportFormat::Machine));
}
