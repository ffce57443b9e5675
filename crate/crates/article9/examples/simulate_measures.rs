//! What-if analysis: would adopting these planned measures make residual
//! risk acceptable? Runs the engine twice without touching any file.
//!
//! Run with: cargo run -p article9 --example simulate_measures

use article9::model::lower;
use article9::risk::{run_process, run_process_assuming, ProcessTrace};
use article9::syntax::parse_source;

const REGISTER: &str = r#"
provider "Mailgate BV" {
  established_in: "NL"
  turnover_eur: 8000000
}

policy {
  entry_into_force: 2023-03-01
}

system "mail-triage" {
  risk_class: high_risk
  annex3_category: "essential_private_services"
  intended_purpose: "Prioritise incoming claims"
  placed_on_eu_market: true
  rms_docs: ["RMS-01"]
}

# acceptable on its own: 0.5 * 0.02 * 0.8 = 0.008 <= 0.01
hazard "hz-spam" {
  description: "Claims misclassified"
  dimension: fundamental_rights
  origin: intended_use
  knowledge: foreseeable
  severity: moderate
  exposure: 0.5
  occurrence: 0.02
  avoidance_failure: 0.8
  communicated: true
}

measure "m-filter" {
  class: control
  targets: ["hz-spam"]
  channel: occurrence
  factor: 0.1
  adopt_order: 1
}
"#;

fn summarize(label: &str, trace: &ProcessTrace) {
    let last = trace.final_iteration();
    println!("{label}: {} after {} iteration(s)", trace.terminal, trace.iterations.len());
    for verdict in &last.hazard_verdicts {
        println!("  {}: residual {}", verdict.subject, verdict.value);
    }
    println!("  overall index: {}", last.overall.value);
}

fn main() {
    let register = lower(&parse_source(REGISTER).unwrap()).unwrap();

    let plain = run_process(&register);
    summarize("as documented", &plain);

    let assumed = run_process_assuming(&register, &["m-filter".to_string()]).unwrap();
    summarize("assuming m-filter adopted", &assumed);

    let delta = plain.final_iteration().overall.value - assumed.final_iteration().overall.value;
    println!("adopting m-filter would cut the overall index by {delta}");
}
