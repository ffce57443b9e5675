//! Run the iterative risk-management process and print the full trace:
//! per-iteration verdicts, adopted measures, and the terminal status.
//!
//! Run with: cargo run -p article9 --example risk_process

use article9::model::lower;
use article9::risk::run_process;
use article9::syntax::parse_source;

const REGISTER: &str = r#"
provider "Demo Labs" {
  established_in: "DE"
  turnover_eur: 5000000
}

policy {
  entry_into_force: 2023-03-01
}

system "triage-1" {
  risk_class: high_risk
  annex3_category: "essential_private_services"
  intended_purpose: "Prioritise incoming claims"
  placed_on_eu_market: true
  rms_docs: ["RMS-01"]
}

# inherent probability 0.5 * 0.02 * 0.4 = 0.004, above the serious
# threshold of 0.001
hazard "hz-miss" {
  description: "Urgent claims ranked too low"
  dimension: fundamental_rights
  origin: intended_use
  knowledge: foreseeable
  severity: serious
  exposure: 0.5
  occurrence: 0.02
  avoidance_failure: 0.4
  methods: ["error analysis"]
  communicated: true
}

measure "m-threshold" {
  class: design
  targets: ["hz-miss"]
  channel: occurrence
  factor: 0.5
  adopt_order: 1
}

measure "m-escalation" {
  class: control
  targets: ["hz-miss"]
  channel: exposure
  factor: 0.25
  adopt_order: 2
}
"#;

fn main() {
    let register = lower(&parse_source(REGISTER).unwrap()).unwrap();
    let trace = run_process(&register);

    for iteration in &trace.iterations {
        println!("iteration {}", iteration.index);
        if !iteration.adopted_measure_ids.is_empty() {
            println!("  adopted: {}", iteration.adopted_measure_ids.join(", "));
        }
        for verdict in &iteration.hazard_verdicts {
            println!(
                "  {}: p = {} vs threshold {} -> {}",
                verdict.subject,
                verdict.value,
                verdict.threshold_used,
                if verdict.acceptable { "acceptable" } else { "unacceptable" }
            );
        }
        println!(
            "  overall index {} vs {} -> {}",
            iteration.overall.value,
            iteration.overall.threshold_used,
            if iteration.overall.acceptable { "acceptable" } else { "unacceptable" }
        );
    }
    println!("terminal: {}", trace.terminal);
    println!("measures in force: {}", trace.total_adopted.join(", "));
}
