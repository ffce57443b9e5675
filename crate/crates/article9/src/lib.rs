//! Deterministic conformity engine for EU AI Act Article 9 risk registers.
//!
//! A register is a single declarative `.a9r` document describing one
//! high-risk AI system: provider, acceptance policy, hazards, risk-
//! reduction measures, test records, process iterations, and reviews. The
//! engine parses it, decides whether Article 9 applies at all, runs the
//! iterative risk-management process to COMPLETE or ABORT, checks the
//! numbered conformity rule suite, and computes administrative-fine
//! exposure.
//!
//! Module map:
//! - [`syntax`]: the register DSL (lexer, parser, canonical serializer)
//! - [`model`]: the typed register and schema lowering
//! - [`scope`]: the four-prong applicability decision
//! - [`risk`]: probability decomposition, residual risk, the process loop
//! - [`conformity`]: the rule catalog and report rendering
//! - [`enforcement`]: administrative-fine exposure
//! - [`cli`]: the `a9r` command-line front end
//!
//! Everything is pure: outputs depend only on the document bytes and
//! explicit inputs (dates, flags). There are no clock reads, so runs are
//! reproducible.

pub mod cli;
pub mod conformity;
pub mod diag;
pub mod enforcement;
pub mod model;
pub mod risk;
pub mod scope;
pub mod span;
pub mod syntax;

pub use conformity::{run_rules, ConformityReport, Finding, FindingSeverity, RuleId};
pub use diag::{Code, Diagnostic};
pub use enforcement::{fine_exposure, FineBasis, FineExposure};
pub use model::{default_policy, lower, Register};
pub use risk::{
    evaluate_acceptability, hazard_probability, overall_residual, residual_probability,
    run_process, run_process_assuming, severity_weight, ProcessTrace, Terminal,
};
pub use scope::{assess_scope, compliance_deadline, ScopeDecision, ScopeQuery};
pub use span::Span;
pub use syntax::{parse_source, serialize, SyntaxTree};
