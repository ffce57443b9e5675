//! Parse a register document, print its canonical form, and show how
//! diagnostics point at exact source locations.
//!
//! Run with: cargo run -p article9 --example parse_register

use article9::syntax::{parse_source, serialize};

const REGISTER: &str = r#"
# A small but complete register.
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
}
"#;

const BROKEN: &str = r#"
system "oops" {
  exposure: [0.1, 0.2,]
"#;

fn main() {
    let tree = parse_source(REGISTER).expect("register parses");
    println!("parsed {} top-level blocks; canonical form:\n", tree.blocks.len());
    print!("{}", serialize(&tree));

    println!("\na broken document reports every problem it finds:\n");
    for diagnostic in parse_source(BROKEN).unwrap_err() {
        println!("  {diagnostic}");
    }
}
