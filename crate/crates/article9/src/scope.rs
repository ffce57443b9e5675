//! Does Article 9 apply to this system and provider at a given date?
//!
//! The decision is the conjunction of four prongs: material (what is
//! regulated), personal (who is regulated), regional (where), and temporal
//! (when). Each prong carries a human-readable reason, so a report shows
//! not just the outcome but why.

use chrono::{Months, NaiveDate};

use crate::model::{Regime, Register, RiskClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScopeQuery {
    pub check_date: NaiveDate,
    pub entry_into_force: NaiveDate,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prong {
    pub holds: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScopeDecision {
    pub applies: bool,
    pub material: Prong,
    pub personal: Prong,
    pub regional: Prong,
    pub temporal: Prong,
}

impl ScopeDecision {
    pub fn prongs(&self) -> [(&'static str, &Prong); 4] {
        [
            ("material", &self.material),
            ("personal", &self.personal),
            ("regional", &self.regional),
            ("temporal", &self.temporal),
        ]
    }
}

/// Date by which a provider must comply: 24 months after entry into force
/// in the original draft, 36 months in the Council compromise. Month
/// arithmetic clamps the day to the target month's last day.
pub fn compliance_deadline(entry_into_force: NaiveDate, regime: Regime) -> NaiveDate {
    let months = match regime {
        Regime::EcDraft => 24,
        Regime::Council => 36,
    };
    entry_into_force
        .checked_add_months(Months::new(months))
        .expect("date arithmetic overflow")
}

/// Evaluates the four prongs. Total: every register yields a decision.
pub fn assess_scope(register: &Register, query: &ScopeQuery) -> ScopeDecision {
    let system = &register.system;
    let provider = &register.provider;

    let material = if system.risk_class == RiskClass::HighRisk {
        Prong {
            holds: true,
            reason: format!(
                "system is classified high_risk (Annex III category \"{}\")",
                system.annex3_category
            ),
        }
    } else {
        Prong {
            holds: false,
            reason: format!(
                "system risk class is {}; Article 9 applies only to high-risk AI systems",
                system.risk_class
            ),
        }
    };

    let personal = if provider.public_authority_exempt {
        Prong {
            holds: false,
            reason: "provider is an exempt public authority or international organisation"
                .to_string(),
        }
    } else {
        Prong {
            holds: true,
            reason: "provider is not covered by the public-authority exemption".to_string(),
        }
    };

    let regional = match (system.placed_on_eu_market, system.output_used_in_eu) {
        (true, true) => Prong {
            holds: true,
            reason: "system is placed on the EU market and its output is used in the EU"
                .to_string(),
        },
        (true, false) => Prong {
            holds: true,
            reason: "system is placed on the EU market".to_string(),
        },
        (false, true) => Prong {
            holds: true,
            reason: "output produced by the system is used in the EU".to_string(),
        },
        (false, false) => Prong {
            holds: false,
            reason: "system is neither placed on the EU market nor is its output used in the EU"
                .to_string(),
        },
    };

    let deadline = compliance_deadline(query.entry_into_force, query.regime);
    let months = match query.regime {
        Regime::EcDraft => 24,
        Regime::Council => 36,
    };
    let temporal = if query.check_date >= deadline {
        Prong {
            holds: true,
            reason: format!(
                "check date {} is on or after the compliance deadline {deadline} ({months} months after entry into force)",
                query.check_date
            ),
        }
    } else {
        Prong {
            holds: false,
            reason: format!(
                "check date {} is before the compliance deadline {deadline} ({months} months after entry into force)",
                query.check_date
            ),
        }
    };

    let applies = material.holds && personal.holds && regional.holds && temporal.holds;
    ScopeDecision {
        applies,
        material,
        personal,
        regional,
        temporal,
    }
}
