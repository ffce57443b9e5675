//! Typed domain model of a risk register, plus the lowering pass that
//! enforces the schema on a generic syntax tree.
//!
//! A register documents one high-risk AI system: its provider, the
//! acceptance policy in force, the hazards identified for the system, the
//! risk-reduction measures, test records, process iterations, and reviews.

mod lower;

pub use lower::lower;

use chrono::NaiveDate;

use crate::span::Span;

macro_rules! ident_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub fn from_ident(s: &str) -> Option<Self> {
                match s {
                    $($text => Some(Self::$variant),)+
                    _ => None,
                }
            }

            pub fn as_ident(&self) -> &'static str {
                match self {
                    $(Self::$variant => $text),+
                }
            }

            pub const IDENTS: &'static [&'static str] = &[$($text),+];
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(self.as_ident())
            }
        }
    };
}

ident_enum!(
    /// Risk classification under the Act's risk-based approach.
    RiskClass {
        Prohibited => "prohibited",
        HighRisk => "high_risk",
        Limited => "limited",
        Minimal => "minimal",
    }
);

ident_enum!(
    /// Which protected interest a hazard can harm.
    Dimension {
        Health => "health",
        Safety => "safety",
        FundamentalRights => "fundamental_rights",
    }
);

ident_enum!(
    /// How the hazard can arise.
    Origin {
        IntendedUse => "intended_use",
        ForeseeableMisuse => "foreseeable_misuse",
        PostMarket => "post_market",
    }
);

ident_enum!(
    /// Known risks have materialized or are certain to; foreseeable risks
    /// have not occurred but can already be identified.
    Knowledge {
        Known => "known",
        Foreseeable => "foreseeable",
    }
);

ident_enum!(
    /// Ordinal severity ladder; ordering is relied on by the engine.
    Severity {
        Minor => "minor",
        Moderate => "moderate",
        Serious => "serious",
        Catastrophic => "catastrophic",
    }
);

ident_enum!(
    EvidenceKind {
        Incident => "incident",
        Report => "report",
        Other => "other",
    }
);

ident_enum!(
    /// The three measure classes: safer design (possibly eliminating the
    /// hazard), mitigation/controls, and information or training for users.
    MeasureClass {
        Design => "design",
        Control => "control",
        Information => "information",
    }
);

ident_enum!(
    /// Probability channel a measure acts on.
    Channel {
        Exposure => "exposure",
        Occurrence => "occurrence",
        Avoidance => "avoidance",
    }
);

ident_enum!(
    MeasureStatus {
        Planned => "planned",
        Adopted => "adopted",
    }
);

ident_enum!(
    Stage {
        Development => "development",
        PreMarket => "pre_market",
        PostMarket => "post_market",
    }
);

ident_enum!(
    TestPurpose {
        MeasureSelection => "measure_selection",
        Consistency => "consistency",
        Chapter2 => "chapter2",
    }
);

ident_enum!(
    IterationOutcome {
        Acceptable => "acceptable",
        MeasuresAdopted => "measures_adopted",
        Aborted => "aborted",
    }
);

ident_enum!(
    /// Which legislative text variant the policy follows.
    Regime {
        EcDraft => "ec_draft",
        Council => "council",
    }
);

/// The fully lowered register document.
#[derive(Debug, Clone, PartialEq)]
pub struct Register {
    pub provider: Provider,
    pub policy: AcceptancePolicy,
    pub system: AiSystemProfile,
    pub hazards: Vec<Hazard>,
    pub measures: Vec<Measure>,
    pub tests: Vec<TestRecord>,
    pub iterations: Vec<IterationRecord>,
    pub reviews: Vec<ReviewRecord>,
    pub children_assessment: Option<ChildrenAssessment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provider {
    pub name: String,
    pub established_in: String,
    pub is_credit_institution: bool,
    pub is_sme: bool,
    /// Total worldwide annual turnover for the preceding financial year,
    /// in whole euros.
    pub turnover_eur: u64,
    pub public_authority_exempt: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AiSystemProfile {
    pub id: String,
    pub risk_class: RiskClass,
    pub annex3_category: String,
    pub intended_purpose: String,
    pub misuses: Vec<String>,
    pub placed_on_eu_market: bool,
    pub output_used_in_eu: bool,
    pub likely_accessed_by_children: bool,
    pub user_profile: Option<UserProfile>,
    pub integrates_with: Option<String>,
    /// References to the written policies, procedures, and instructions
    /// that document the risk management system.
    pub rms_docs: Vec<String>,
}

/// What can be expected of the system's users; context for information
/// measures.
#[derive(Debug, Clone, PartialEq)]
pub struct UserProfile {
    pub technical_knowledge: String,
    pub experience: String,
    pub education: String,
    pub training: String,
}

/// A potential source of harm. Probability of harm decomposes into
/// exposure to the hazard, occurrence of the hazardous event, and failure
/// to avoid or limit the harm.
#[derive(Debug, Clone, PartialEq)]
pub struct Hazard {
    pub id: String,
    pub description: String,
    pub dimension: Dimension,
    pub origin: Origin,
    pub knowledge: Knowledge,
    pub severity: Severity,
    pub exposure: f64,
    pub occurrence: f64,
    pub avoidance_failure: f64,
    pub evidence: Vec<Evidence>,
    pub methods: Vec<String>,
    pub affects_children: bool,
    pub communicated: bool,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evidence {
    pub kind: EvidenceKind,
    pub reference: String,
}

/// A risk-reduction action. Acts multiplicatively on one probability
/// channel of each targeted hazard, or eliminates the hazard outright
/// (design measures only).
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    pub id: String,
    pub class: MeasureClass,
    pub targets: Vec<String>,
    pub channel: Channel,
    pub factor: f64,
    pub eliminate: bool,
    pub adopt_order: u32,
    pub status: MeasureStatus,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestRecord {
    pub id: String,
    pub metric: String,
    pub threshold: f64,
    pub declared_at: NaiveDate,
    pub executed_at: NaiveDate,
    pub stage: Stage,
    pub result: f64,
    pub purpose: TestPurpose,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub stage: Stage,
    pub date: NaiveDate,
    pub outcome: IterationOutcome,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReviewRecord {
    pub date: NaiveDate,
    pub note: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChildrenAssessment {
    pub date: NaiveDate,
    pub summary: String,
    pub span: Span,
}

/// Residual-risk acceptance thresholds per severity class, plus the
/// knobs that govern the overall judgment. Stricter thresholds apply to
/// worse harm.
#[derive(Debug, Clone, PartialEq)]
pub struct AcceptancePolicy {
    pub threshold_minor: f64,
    pub threshold_moderate: f64,
    pub threshold_serious: f64,
    pub threshold_catastrophic: f64,
    pub overall_threshold: f64,
    /// Residual probabilities at or below this level need no user
    /// communication.
    pub de_minimis: f64,
    pub review_interval_months: u32,
    /// Divisor applied to thresholds for hazards affecting children on
    /// systems likely to be accessed by children.
    pub children_tightening_factor: f64,
    pub regime: Regime,
    pub entry_into_force: Option<NaiveDate>,
}

impl AcceptancePolicy {
    pub fn threshold_for(&self, severity: Severity) -> f64 {
        match severity {
            Severity::Minor => self.threshold_minor,
            Severity::Moderate => self.threshold_moderate,
            Severity::Serious => self.threshold_serious,
            Severity::Catastrophic => self.threshold_catastrophic,
        }
    }
}

/// The documented default acceptance policy: one decade of probability per
/// severity band, annual review, tenfold tightening for children.
/// Registers override any of it in their `policy` block.
pub fn default_policy() -> AcceptancePolicy {
    AcceptancePolicy {
        threshold_minor: 0.1,
        threshold_moderate: 0.01,
        threshold_serious: 0.001,
        threshold_catastrophic: 0.00001,
        overall_threshold: 0.5,
        de_minimis: 0.000001,
        review_interval_months: 12,
        children_tightening_factor: 10.0,
        regime: Regime::EcDraft,
        entry_into_force: None,
    }
}
