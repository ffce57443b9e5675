//! Maximum administrative-fine exposure across offender types, turnover
//! levels, and regimes, showing which branch of the formula binds.
//!
//! Run with: cargo run -p article9 --example fine_exposure

use article9::enforcement::fine_exposure;
use article9::model::Regime;

fn main() {
    let cases = [
        (100_000_000u64, true, false, Regime::EcDraft),
        (1_000_000_000, true, false, Regime::EcDraft),
        (1_000_000_000, true, true, Regime::EcDraft),
        (1_000_000_000, true, true, Regime::Council),
        (400_000_000, true, true, Regime::Council),
        (5_000_000, false, false, Regime::EcDraft),
    ];
    println!("{:>14}  {:^7}  {:^5}  {:^8}  exposure", "turnover", "company", "sme", "regime");
    for (turnover, company, sme, regime) in cases {
        let exposure = fine_exposure(turnover, company, sme, regime);
        println!(
            "{turnover:>14}  {company:^7}  {sme:^5}  {regime:^8}  {exposure}"
        );
    }
}
