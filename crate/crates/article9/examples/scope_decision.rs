//! The four-prong applicability decision across a few providers and
//! dates, including the Council regime's longer transition period.
//!
//! Run with: cargo run -p article9 --example scope_decision

use article9::model::{lower, Regime};
use article9::scope::{assess_scope, compliance_deadline, ScopeQuery};
use article9::syntax::parse_source;

const REGISTER: &str = r#"
provider "Pacifica Insight Inc" {
  established_in: "US"
  turnover_eur: 75000000
}

policy {
}

system "screener-x" {
  risk_class: high_risk
  annex3_category: "employment"
  intended_purpose: "Score applications for manual review"
  placed_on_eu_market: false
  output_used_in_eu: true
  rms_docs: ["RMS-01"]
}
"#;

fn main() {
    let register = lower(&parse_source(REGISTER).unwrap()).unwrap();
    let entry = "2023-03-01".parse().unwrap();

    for regime in [Regime::EcDraft, Regime::Council] {
        println!(
            "{regime}: compliance deadline {}",
            compliance_deadline(entry, regime)
        );
    }

    for (label, check_date) in [("2024-06-01", "2024-06-01"), ("2025-06-01", "2025-06-01")] {
        let decision = assess_scope(
            &register,
            &ScopeQuery {
                check_date: check_date.parse().unwrap(),
                entry_into_force: entry,
                regime: Regime::EcDraft,
            },
        );
        println!(
            "\nat {label}: {}",
            if decision.applies { "APPLIES" } else { "DOES NOT APPLY" }
        );
        for (name, prong) in decision.prongs() {
            println!(
                "  {name}: {} - {}",
                if prong.holds { "holds" } else { "fails" },
                prong.reason
            );
        }
    }
}
