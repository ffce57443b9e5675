//! Maximum administrative-fine exposure for Article 9 non-compliance.
//!
//! The output is the statutory maximum ("up to"), not a predicted fine:
//! for companies, the higher of EUR 20 million and 4% of total worldwide
//! annual turnover; EUR 20 million otherwise. The Council compromise caps
//! the fine for SMEs at 2% of turnover. All arithmetic is exact integer
//! EUR.

use std::fmt;

use crate::model::Regime;

const FIXED_FLOOR_EUR: u64 = 20_000_000;

/// Which branch of the formula produced the amount.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FineBasis {
    FixedFloor,
    TurnoverPercentage,
    SmeCap,
}

impl FineBasis {
    pub fn as_str(&self) -> &'static str {
        match self {
            FineBasis::FixedFloor => "fixed-floor",
            FineBasis::TurnoverPercentage => "turnover-percentage",
            FineBasis::SmeCap => "sme-cap",
        }
    }
}

impl fmt::Display for FineBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FineExposure {
    pub amount_eur: u64,
    pub basis: FineBasis,
    pub regime: Regime,
    pub is_sme: bool,
    pub turnover_eur: u64,
}

impl fmt::Display for FineExposure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} EUR ({})", self.amount_eur, self.basis)
    }
}

fn percent(turnover_eur: u64, points: u64) -> u64 {
    (turnover_eur as u128 * points as u128 / 100) as u64
}

/// Maximum exposure for the given offender. The 4% branch applies only to
/// companies; the SME cap only under the Council regime, where it caps the
/// full standard amount.
pub fn fine_exposure(
    turnover_eur: u64,
    is_company: bool,
    is_sme: bool,
    regime: Regime,
) -> FineExposure {
    let four_pct = percent(turnover_eur, 4);
    let (mut amount, mut basis) = if is_company && four_pct > FIXED_FLOOR_EUR {
        (four_pct, FineBasis::TurnoverPercentage)
    } else {
        (FIXED_FLOOR_EUR, FineBasis::FixedFloor)
    };
    if regime == Regime::Council && is_sme {
        let cap = percent(turnover_eur, 2);
        if cap < amount {
            amount = cap;
            basis = FineBasis::SmeCap;
        }
    }
    FineExposure {
        amount_eur: amount,
        basis,
        regime,
        is_sme,
        turnover_eur,
    }
}
