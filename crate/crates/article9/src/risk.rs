//! Risk estimation, evaluation, and the iterative risk-management process.
//!
//! Probability of harm decomposes into exposure x occurrence x
//! avoidance-failure (independence model). Each adopted measure scales one
//! of the three channels by its factor, or eliminates the hazard outright.
//! Risk is probability weighted by severity; a hazard is acceptable when
//! its residual probability is at or below the policy threshold for its
//! severity class, and the register as a whole when the severity-weighted
//! sum of residual probabilities is at or below the overall threshold.
//!
//! `run_process` drives the loop to a terminal status: evaluate all
//! hazards; if everything is acceptable the process is COMPLETE; otherwise
//! adopt the next planned measure (ascending adopt_order, one per
//! iteration) and re-evaluate; when no planned measures remain and risk is
//! still unacceptable the process ABORTs — development must stop.

use std::collections::BTreeSet;
use std::fmt;

use crate::model::{
    AcceptancePolicy, Channel, Hazard, Measure, MeasureClass, MeasureStatus, Register, Severity,
};

/// Contract breach on an operation whose inputs are normally guaranteed by
/// lowering.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractViolation {
    pub what: &'static str,
    pub value: f64,
}

impl fmt::Display for ContractViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} out of range: {}", self.what, self.value)
    }
}

impl std::error::Error for ContractViolation {}

/// Probability of harm as the product of the three channel probabilities.
pub fn hazard_probability(
    exposure: f64,
    occurrence: f64,
    avoidance_failure: f64,
) -> Result<f64, ContractViolation> {
    for (what, v) in [
        ("exposure", exposure),
        ("occurrence", occurrence),
        ("avoidance_failure", avoidance_failure),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(ContractViolation { what, value: v });
        }
    }
    Ok(exposure * occurrence * avoidance_failure)
}

/// Default severity weights: a factor of three per band keeps one
/// catastrophic hazard heavier than many minor ones.
pub fn severity_weight(severity: Severity) -> f64 {
    match severity {
        Severity::Minor => 1.0,
        Severity::Moderate => 3.0,
        Severity::Serious => 9.0,
        Severity::Catastrophic => 27.0,
    }
}

/// Residual probability of a hazard under the given adopted measures.
/// Callers filter `adopted` to measures targeting this hazard. Any adopted
/// eliminating design measure forces the probability to exactly zero;
/// otherwise every measure scales its channel by its factor.
pub fn residual_probability(hazard: &Hazard, adopted: &[&Measure]) -> f64 {
    if adopted
        .iter()
        .any(|m| m.class == MeasureClass::Design && m.eliminate)
    {
        return 0.0;
    }
    let mut exposure = hazard.exposure;
    let mut occurrence = hazard.occurrence;
    let mut avoidance = hazard.avoidance_failure;
    for m in adopted {
        match m.channel {
            Channel::Exposure => exposure *= m.factor,
            Channel::Occurrence => occurrence *= m.factor,
            Channel::Avoidance => avoidance *= m.factor,
        }
    }
    exposure * occurrence * avoidance
}

/// Who a verdict is about.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum VerdictSubject {
    Hazard(String),
    Overall,
}

impl VerdictSubject {
    pub fn hazard_id(&self) -> Option<&str> {
        match self {
            VerdictSubject::Hazard(id) => Some(id),
            VerdictSubject::Overall => None,
        }
    }
}

impl fmt::Display for VerdictSubject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerdictSubject::Hazard(id) => f.write_str(id),
            VerdictSubject::Overall => f.write_str("OVERALL"),
        }
    }
}

/// One acceptability judgment: `acceptable` iff `value <= threshold_used`.
#[derive(Debug, Clone, PartialEq)]
pub struct AcceptabilityVerdict {
    pub subject: VerdictSubject,
    pub acceptable: bool,
    pub threshold_used: f64,
    pub value: f64,
}

/// Judges one probability against the policy threshold for its severity.
/// When the hazard affects children and the system is likely to be
/// accessed by children, the threshold tightens by the policy factor.
pub fn evaluate_acceptability(
    subject: VerdictSubject,
    probability: f64,
    severity: Severity,
    hazard_affects_children: bool,
    system_children_flag: bool,
    policy: &AcceptancePolicy,
) -> AcceptabilityVerdict {
    let mut threshold = policy.threshold_for(severity);
    if hazard_affects_children && system_children_flag {
        threshold /= policy.children_tightening_factor;
    }
    AcceptabilityVerdict {
        subject,
        acceptable: probability <= threshold,
        threshold_used: threshold,
        value: probability,
    }
}

/// Severity-weighted sum of residual probabilities, judged against the
/// overall threshold.
pub fn overall_residual(
    items: &[(f64, Severity)],
    policy: &AcceptancePolicy,
) -> AcceptabilityVerdict {
    let index: f64 = items
        .iter()
        .map(|(p, severity)| p * severity_weight(*severity))
        .sum();
    AcceptabilityVerdict {
        subject: VerdictSubject::Overall,
        acceptable: index <= policy.overall_threshold,
        threshold_used: policy.overall_threshold,
        value: index,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    Complete,
    Abort,
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Terminal::Complete => f.write_str("COMPLETE"),
            Terminal::Abort => f.write_str("ABORT"),
        }
    }
}

/// One evaluation round: which measures were in force entering it (only
/// the newly adopted ones after the first round) and what the verdicts
/// were.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessIteration {
    pub index: usize,
    pub adopted_measure_ids: Vec<String>,
    pub hazard_verdicts: Vec<AcceptabilityVerdict>,
    pub overall: AcceptabilityVerdict,
}

impl ProcessIteration {
    pub fn all_acceptable(&self) -> bool {
        self.overall.acceptable && self.hazard_verdicts.iter().all(|v| v.acceptable)
    }
}

/// The recorded run of the iterative process.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessTrace {
    pub iterations: Vec<ProcessIteration>,
    pub terminal: Terminal,
    /// Every measure in force at termination, in adoption order.
    pub total_adopted: Vec<String>,
}

impl ProcessTrace {
    pub fn final_iteration(&self) -> &ProcessIteration {
        self.iterations.last().expect("trace has >= 1 iteration")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownMeasure(pub String);

impl fmt::Display for UnknownMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown measure id `{}`", self.0)
    }
}

impl std::error::Error for UnknownMeasure {}

/// Runs the iterative risk-management process on a lowered register.
pub fn run_process(register: &Register) -> ProcessTrace {
    run_process_assuming(register, &[]).expect("empty assumption list cannot fail")
}

/// Like [`run_process`], but treats the listed planned measures as already
/// adopted at the first iteration. This is the what-if entry point; it
/// never mutates the register.
pub fn run_process_assuming(
    register: &Register,
    assume_adopted: &[String],
) -> Result<ProcessTrace, UnknownMeasure> {
    for id in assume_adopted {
        if !register.measures.iter().any(|m| &m.id == id) {
            return Err(UnknownMeasure(id.clone()));
        }
    }

    let mut in_force: Vec<String> = register
        .measures
        .iter()
        .filter(|m| m.status == MeasureStatus::Adopted || assume_adopted.contains(&m.id))
        .map(|m| m.id.clone())
        .collect();
    let mut in_force_set: BTreeSet<String> = in_force.iter().cloned().collect();

    let mut planned: Vec<&Measure> = register
        .measures
        .iter()
        .filter(|m| !in_force_set.contains(m.id.as_str()))
        .collect();
    planned.sort_by_key(|m| m.adopt_order);
    let mut planned = planned.into_iter();

    let mut iterations = Vec::new();
    let mut newly_adopted = in_force.clone();
    let terminal = loop {
        let hazard_verdicts: Vec<AcceptabilityVerdict> = register
            .hazards
            .iter()
            .map(|h| {
                let acting: Vec<&Measure> = register
                    .measures
                    .iter()
                    .filter(|m| {
                        in_force_set.contains(m.id.as_str()) && m.targets.contains(&h.id)
                    })
                    .collect();
                let p = residual_probability(h, &acting);
                evaluate_acceptability(
                    VerdictSubject::Hazard(h.id.clone()),
                    p,
                    h.severity,
                    h.affects_children,
                    register.system.likely_accessed_by_children,
                    &register.policy,
                )
            })
            .collect();
        let overall_inputs: Vec<(f64, Severity)> = register
            .hazards
            .iter()
            .zip(&hazard_verdicts)
            .map(|(h, v)| (v.value, h.severity))
            .collect();
        let overall = overall_residual(&overall_inputs, &register.policy);

        let iteration = ProcessIteration {
            index: iterations.len() + 1,
            adopted_measure_ids: std::mem::take(&mut newly_adopted),
            hazard_verdicts,
            overall,
        };
        let acceptable = iteration.all_acceptable();
        iterations.push(iteration);

        if acceptable {
            break Terminal::Complete;
        }
        match planned.next() {
            Some(next) => {
                in_force.push(next.id.clone());
                in_force_set.insert(next.id.clone());
                newly_adopted = vec![next.id.clone()];
            }
            None => break Terminal::Abort,
        }
    };

    Ok(ProcessTrace {
        iterations,
        terminal,
        total_adopted: in_force,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{lower, Register};
    use crate::syntax::parse_source;

    fn approx(a: f64, b: f64) {
        assert!((a - b).abs() <= 1e-12, "{a} !~ {b}");
    }

    #[test]
    fn probability_is_the_channel_product() {
        assert_eq!(hazard_probability(1.0, 1.0, 1.0).unwrap(), 1.0);
        approx(hazard_probability(0.5, 0.2, 0.5).unwrap(), 0.05);
        assert_eq!(hazard_probability(0.0, 0.9, 0.9).unwrap(), 0.0);
    }

    #[test]
    fn probability_rejects_out_of_range_inputs() {
        let err = hazard_probability(1.5, 0.5, 0.5).unwrap_err();
        assert_eq!(err.what, "exposure");
        assert!(hazard_probability(0.5, -0.1, 0.5).is_err());
    }

    #[test]
    fn severity_weights_strictly_increase() {
        assert_eq!(severity_weight(Severity::Minor), 1.0);
        assert_eq!(severity_weight(Severity::Moderate), 3.0);
        assert_eq!(severity_weight(Severity::Serious), 9.0);
        assert_eq!(severity_weight(Severity::Catastrophic), 27.0);
        assert!(
            severity_weight(Severity::Minor) < severity_weight(Severity::Moderate)
                && severity_weight(Severity::Moderate) < severity_weight(Severity::Serious)
                && severity_weight(Severity::Serious) < severity_weight(Severity::Catastrophic)
        );
    }

    fn hazard(e: f64, o: f64, a: f64, severity: Severity) -> Hazard {
        Hazard {
            id: "h".to_string(),
            description: String::new(),
            dimension: crate::model::Dimension::Health,
            origin: crate::model::Origin::IntendedUse,
            knowledge: crate::model::Knowledge::Foreseeable,
            severity,
            exposure: e,
            occurrence: o,
            avoidance_failure: a,
            evidence: Vec::new(),
            methods: Vec::new(),
            affects_children: false,
            communicated: false,
            span: crate::span::Span::DOCUMENT_START,
        }
    }

    fn measure(id: &str, class: MeasureClass, channel: Channel, factor: f64) -> Measure {
        Measure {
            id: id.to_string(),
            class,
            targets: vec!["h".to_string()],
            channel,
            factor,
            eliminate: false,
            adopt_order: 1,
            status: MeasureStatus::Planned,
            span: crate::span::Span::DOCUMENT_START,
        }
    }

    #[test]
    fn residual_with_no_measures_is_inherent() {
        let h = hazard(0.5, 0.2, 0.5, Severity::Minor);
        approx(residual_probability(&h, &[]), 0.05);
    }

    #[test]
    fn eliminating_design_measure_forces_zero() {
        let h = hazard(1.0, 1.0, 1.0, Severity::Catastrophic);
        let mut m = measure("m", MeasureClass::Design, Channel::Occurrence, 0.9);
        m.eliminate = true;
        let other = measure("m2", MeasureClass::Control, Channel::Exposure, 0.5);
        assert_eq!(residual_probability(&h, &[&m, &other]), 0.0);
    }

    #[test]
    fn measures_scale_their_channels() {
        // hand-traced: 1 * (0.5 * 0.5) * (1 * 0.4) = 0.1
        let h = hazard(1.0, 0.5, 1.0, Severity::Minor);
        let control = measure("c", MeasureClass::Control, Channel::Occurrence, 0.5);
        let info = measure("i", MeasureClass::Information, Channel::Avoidance, 0.4);
        approx(residual_probability(&h, &[&control, &info]), 0.1);
    }

    #[test]
    fn zero_probability_is_always_acceptable() {
        let policy = crate::model::default_policy();
        for severity in [
            Severity::Minor,
            Severity::Moderate,
            Severity::Serious,
            Severity::Catastrophic,
        ] {
            let v = evaluate_acceptability(
                VerdictSubject::Overall,
                0.0,
                severity,
                true,
                true,
                &policy,
            );
            assert!(v.acceptable);
        }
    }

    #[test]
    fn default_minor_threshold_accepts_five_percent() {
        let policy = crate::model::default_policy();
        let v = evaluate_acceptability(
            VerdictSubject::Hazard("h".into()),
            0.05,
            Severity::Minor,
            false,
            false,
            &policy,
        );
        assert!(v.acceptable);
        assert_eq!(v.threshold_used, 0.1);
    }

    #[test]
    fn children_tightening_divides_the_threshold() {
        // oracle: 0.1 / 10 = 0.01 and 0.05 > 0.01
        let policy = crate::model::default_policy();
        let v = evaluate_acceptability(
            VerdictSubject::Hazard("h".into()),
            0.05,
            Severity::Minor,
            true,
            true,
            &policy,
        );
        assert!(!v.acceptable);
        approx(v.threshold_used, 0.01);
        // one flag alone does not tighten
        for (hz, sys) in [(true, false), (false, true)] {
            let v = evaluate_acceptability(
                VerdictSubject::Hazard("h".into()),
                0.05,
                Severity::Minor,
                hz,
                sys,
                &policy,
            );
            assert!(v.acceptable);
        }
    }

    #[test]
    fn overall_index_is_the_weighted_sum() {
        let policy = crate::model::default_policy();
        let empty = overall_residual(&[], &policy);
        assert_eq!(empty.value, 0.0);
        assert!(empty.acceptable);

        // oracle: 0.01 * 9 + 0.1 * 1 = 0.19 <= 0.5
        let v = overall_residual(
            &[(0.01, Severity::Serious), (0.1, Severity::Minor)],
            &policy,
        );
        approx(v.value, 0.19);
        assert!(v.acceptable);

        // oracle: 0.05 * 27 = 1.35 > 0.5
        let v = overall_residual(&[(0.05, Severity::Catastrophic)], &policy);
        approx(v.value, 1.35);
        assert!(!v.acceptable);
    }

    fn register_from(src: &str) -> Register {
        lower(&parse_source(src).unwrap()).unwrap()
    }

    const HEAD: &str = r#"
provider "P" {
  established_in: "DE"
  turnover_eur: 1000000
}
policy {
}
system "s" {
  risk_class: minimal
  intended_purpose: "demo"
}
"#;

    #[test]
    fn all_acceptable_completes_in_one_iteration() {
        let src = format!(
            "{HEAD}
hazard \"ok\" {{
  description: \"d\"
  dimension: health
  origin: intended_use
  knowledge: foreseeable
  severity: minor
  exposure: 0.5
  occurrence: 0.1
  avoidance_failure: 1
}}
"
        );
        let trace = run_process(&register_from(&src));
        assert_eq!(trace.terminal, Terminal::Complete);
        assert_eq!(trace.iterations.len(), 1);
        assert!(trace.total_adopted.is_empty());
    }

    #[test]
    fn failing_hazard_fixed_by_sole_planned_measure() {
        // hand-traced: inherent 0.5 * 0.02 * 0.4 = 0.004 > 0.001 (serious);
        // after the control (occurrence x 0.1): 0.5 * 0.002 * 0.4 = 0.0004 <= 0.001
        let src = format!(
            "{HEAD}
hazard \"hz\" {{
  description: \"d\"
  dimension: safety
  origin: intended_use
  knowledge: foreseeable
  severity: serious
  exposure: 0.5
  occurrence: 0.02
  avoidance_failure: 0.4
}}
measure \"m-fix\" {{
  class: control
  targets: [\"hz\"]
  channel: occurrence
  factor: 0.1
  adopt_order: 1
}}
"
        );
        let trace = run_process(&register_from(&src));
        assert_eq!(trace.terminal, Terminal::Complete);
        assert_eq!(trace.iterations.len(), 2);
        assert_eq!(trace.total_adopted, vec!["m-fix".to_string()]);
        assert!(!trace.iterations[0].all_acceptable());
        assert_eq!(trace.iterations[1].adopted_measure_ids, vec!["m-fix"]);
        approx(trace.iterations[0].hazard_verdicts[0].value, 0.004);
        approx(trace.iterations[1].hazard_verdicts[0].value, 0.0004);
    }

    #[test]
    fn unmitigable_hazard_aborts_after_one_iteration() {
        let src = format!(
            "{HEAD}
hazard \"melt\" {{
  description: \"d\"
  dimension: safety
  origin: intended_use
  knowledge: foreseeable
  severity: catastrophic
  exposure: 0.5
  occurrence: 0.001
  avoidance_failure: 0.1
}}
"
        );
        let trace = run_process(&register_from(&src));
        assert_eq!(trace.terminal, Terminal::Abort);
        assert_eq!(trace.iterations.len(), 1);
        assert!(!trace.final_iteration().all_acceptable());
    }

    #[test]
    fn preadopted_measures_count_from_iteration_one() {
        let src = format!(
            "{HEAD}
hazard \"hz\" {{
  description: \"d\"
  dimension: safety
  origin: intended_use
  knowledge: foreseeable
  severity: serious
  exposure: 0.5
  occurrence: 0.02
  avoidance_failure: 0.4
}}
measure \"m-live\" {{
  class: control
  targets: [\"hz\"]
  channel: occurrence
  factor: 0.1
  adopt_order: 1
  status: adopted
}}
"
        );
        let trace = run_process(&register_from(&src));
        assert_eq!(trace.terminal, Terminal::Complete);
        assert_eq!(trace.iterations.len(), 1);
        assert_eq!(trace.iterations[0].adopted_measure_ids, vec!["m-live"]);
        assert_eq!(trace.total_adopted, vec!["m-live".to_string()]);
    }

    #[test]
    fn assuming_unknown_measure_is_an_error() {
        let reg = register_from(HEAD);
        let err = run_process_assuming(&reg, &["nope".to_string()]).unwrap_err();
        assert_eq!(err, UnknownMeasure("nope".to_string()));
    }

    #[test]
    fn zero_hazards_complete_immediately() {
        let trace = run_process(&register_from(HEAD));
        assert_eq!(trace.terminal, Terminal::Complete);
        assert_eq!(trace.iterations.len(), 1);
        assert_eq!(trace.final_iteration().overall.value, 0.0);
    }
}
