//! Lowering: syntax tree -> typed [`Register`].
//!
//! Lowering is total on well-formed trees: it returns either a register
//! satisfying every type invariant or at least one diagnostic, never both.
//! Unknown keys and unknown enum values are hard errors; a compliance
//! document must not silently ignore author intent. Diagnostics carry the
//! span of the offending field, not the whole block.

use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::diag::{Code, Diagnostic};
use crate::model::*;
use crate::span::Span;
use crate::syntax::{Block, Field, Item, SyntaxTree, Value};

pub fn lower(tree: &SyntaxTree) -> Result<Register, Vec<Diagnostic>> {
    let mut lo = Lowerer { diags: Vec::new() };
    let register = lo.document(tree);
    if lo.diags.is_empty() {
        Ok(register)
    } else {
        Err(lo.diags)
    }
}

struct Lowerer {
    diags: Vec<Diagnostic>,
}

impl Lowerer {
    fn error(&mut self, code: Code, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::new(code, span, msg));
    }

    fn document(&mut self, tree: &SyntaxTree) -> Register {
        let mut provider: Option<Provider> = None;
        let mut policy: Option<AcceptancePolicy> = None;
        let mut system: Option<AiSystemProfile> = None;
        let mut hazards: Vec<Hazard> = Vec::new();
        let mut measures: Vec<(Measure, Span, Span)> = Vec::new(); // + targets/adopt_order spans
        let mut tests: Vec<TestRecord> = Vec::new();
        let mut iterations: Vec<IterationRecord> = Vec::new();
        let mut reviews: Vec<ReviewRecord> = Vec::new();
        let mut children: Option<ChildrenAssessment> = None;

        for block in &tree.blocks {
            match block.keyword.as_str() {
                "provider" => {
                    let lowered = self.provider(block);
                    self.set_singleton(&mut provider, lowered, block);
                }
                "policy" => {
                    let lowered = self.policy(block);
                    self.set_singleton(&mut policy, lowered, block);
                }
                "system" => {
                    let lowered = self.system(block);
                    self.set_singleton(&mut system, lowered, block);
                }
                "hazard" => hazards.push(self.hazard(block)),
                "measure" => measures.push(self.measure(block)),
                "test" => tests.push(self.test(block)),
                "iteration" => iterations.push(self.iteration(block)),
                "review" => reviews.push(self.review(block)),
                "children_assessment" => {
                    let lowered = self.children_assessment(block);
                    self.set_singleton(&mut children, lowered, block);
                }
                other => self.error(
                    Code::UnknownKey,
                    block.span,
                    format!("unknown block `{other}`"),
                ),
            }
        }

        for (name, present) in [
            ("provider", provider.is_some()),
            ("policy", policy.is_some()),
            ("system", system.is_some()),
        ] {
            if !present {
                self.error(
                    Code::MissingRequiredBlock,
                    Span::DOCUMENT_START,
                    format!("missing required block `{name}`"),
                );
            }
        }

        self.check_unique_ids("hazard", hazards.iter().map(|h| (h.id.as_str(), h.span)));
        self.check_unique_ids(
            "measure",
            measures.iter().map(|(m, _, _)| (m.id.as_str(), m.span)),
        );

        let hazard_ids: Vec<&str> = hazards.iter().map(|h| h.id.as_str()).collect();
        let mut dangling: Vec<(Span, String)> = Vec::new();
        for (m, targets_span, _) in &measures {
            for target in &m.targets {
                if !hazard_ids.contains(&target.as_str()) {
                    dangling.push((
                        *targets_span,
                        format!("measure `{}` targets unknown hazard `{target}`", m.id),
                    ));
                }
            }
        }
        for (span, msg) in dangling {
            self.error(Code::DanglingMeasureTarget, span, msg);
        }

        let mut order_clashes: Vec<(Span, String)> = Vec::new();
        let mut seen_orders: BTreeMap<u32, &str> = BTreeMap::new();
        for (m, _, order_span) in &measures {
            if let Some(first) = seen_orders.get(&m.adopt_order) {
                order_clashes.push((
                    *order_span,
                    format!(
                        "adopt_order {} of measure `{}` is already used by measure `{first}`",
                        m.adopt_order, m.id
                    ),
                ));
            } else {
                seen_orders.insert(m.adopt_order, &m.id);
            }
        }
        for (span, msg) in order_clashes {
            self.error(Code::InvalidFieldCombination, span, msg);
        }

        Register {
            provider: provider.unwrap_or_else(placeholder_provider),
            policy: policy.unwrap_or_else(default_policy),
            system: system.unwrap_or_else(placeholder_system),
            hazards,
            measures: measures.into_iter().map(|(m, _, _)| m).collect(),
            tests,
            iterations,
            reviews,
            children_assessment: children,
        }
    }

    fn set_singleton<T>(&mut self, slot: &mut Option<T>, value: T, block: &Block) {
        if slot.is_some() {
            self.error(
                Code::DuplicateKey,
                block.span,
                format!(
                    "duplicate `{}` block; exactly one is allowed per document",
                    block.keyword
                ),
            );
        } else {
            *slot = Some(value);
        }
    }

    fn check_unique_ids<'a>(&mut self, what: &str, ids: impl Iterator<Item = (&'a str, Span)>) {
        let mut seen: Vec<&str> = Vec::new();
        let mut dups: Vec<(Span, String)> = Vec::new();
        for (id, span) in ids {
            if seen.contains(&id) {
                dups.push((span, format!("duplicate {what} id `{id}`")));
            } else {
                seen.push(id);
            }
        }
        for (span, msg) in dups {
            self.error(Code::DuplicateId, span, msg);
        }
    }

    fn provider(&mut self, block: &Block) -> Provider {
        let mut r = BlockReader::new(block);
        let name = r.req_label().unwrap_or_default();
        let established_in = r.req_str("established_in").unwrap_or_default();
        let is_credit_institution = r.bool_or("is_credit_institution", false);
        let is_sme = r.bool_or("is_sme", false);
        let turnover_eur = r.req_money("turnover_eur").unwrap_or(0);
        let public_authority_exempt = r.bool_or("public_authority_exempt", false);
        self.diags.extend(r.finish());
        Provider {
            name,
            established_in,
            is_credit_institution,
            is_sme,
            turnover_eur,
            public_authority_exempt,
        }
    }

    fn policy(&mut self, block: &Block) -> AcceptancePolicy {
        let d = default_policy();
        let mut r = BlockReader::new(block);
        r.no_label();
        let threshold_minor = r.prob_or("threshold_minor", d.threshold_minor);
        let threshold_moderate = r.prob_or("threshold_moderate", d.threshold_moderate);
        let threshold_serious = r.prob_or("threshold_serious", d.threshold_serious);
        let threshold_catastrophic = r.prob_or("threshold_catastrophic", d.threshold_catastrophic);
        let overall_threshold = r.number_or("overall_threshold", d.overall_threshold);
        let de_minimis = r.prob_or("de_minimis", d.de_minimis);
        let review_interval_months =
            r.posint_or("review_interval_months", d.review_interval_months);
        let children_tightening_factor =
            r.number_or("children_tightening_factor", d.children_tightening_factor);
        let regime = r
            .enum_or("regime", Regime::from_ident, Regime::IDENTS)
            .unwrap_or(d.regime);
        let entry_into_force = r.opt_date("entry_into_force");

        // ladder checks: stricter thresholds for worse harm
        for (hi_key, hi, lo_key, lo) in [
            (
                "threshold_minor",
                threshold_minor,
                "threshold_moderate",
                threshold_moderate,
            ),
            (
                "threshold_moderate",
                threshold_moderate,
                "threshold_serious",
                threshold_serious,
            ),
            (
                "threshold_serious",
                threshold_serious,
                "threshold_catastrophic",
                threshold_catastrophic,
            ),
        ] {
            if hi < lo {
                let span = r
                    .field_span(lo_key)
                    .or_else(|| r.field_span(hi_key))
                    .unwrap_or(block.span);
                r.error(
                    Code::ValueOutOfRange,
                    span,
                    format!("{lo_key} ({lo}) must not exceed {hi_key} ({hi})"),
                );
            }
        }
        if de_minimis > threshold_catastrophic {
            let span = r
                .field_span("de_minimis")
                .or_else(|| r.field_span("threshold_catastrophic"))
                .unwrap_or(block.span);
            r.error(
                Code::ValueOutOfRange,
                span,
                format!(
                    "de_minimis ({de_minimis}) must not exceed threshold_catastrophic ({threshold_catastrophic})"
                ),
            );
        }
        if overall_threshold < 0.0 {
            let span = r.field_span("overall_threshold").unwrap_or(block.span);
            r.error(
                Code::ValueOutOfRange,
                span,
                format!("overall_threshold must be non-negative, got {overall_threshold}"),
            );
        }
        if children_tightening_factor < 1.0 {
            let span = r
                .field_span("children_tightening_factor")
                .unwrap_or(block.span);
            r.error(
                Code::ValueOutOfRange,
                span,
                format!(
                    "children_tightening_factor must be at least 1, got {children_tightening_factor}"
                ),
            );
        }
        self.diags.extend(r.finish());
        AcceptancePolicy {
            threshold_minor,
            threshold_moderate,
            threshold_serious,
            threshold_catastrophic,
            overall_threshold,
            de_minimis,
            review_interval_months,
            children_tightening_factor,
            regime,
            entry_into_force,
        }
    }

    fn system(&mut self, block: &Block) -> AiSystemProfile {
        let mut r = BlockReader::new(block);
        let id = r.req_label().unwrap_or_default();
        let risk_class = r
            .req_enum("risk_class", RiskClass::from_ident, RiskClass::IDENTS)
            .unwrap_or(RiskClass::Minimal);
        let annex3_category = r.str_or("annex3_category", "");
        let intended_purpose = r.req_str("intended_purpose").unwrap_or_default();
        let misuses = r.str_list_or("misuses");
        let placed_on_eu_market = r.bool_or("placed_on_eu_market", false);
        let output_used_in_eu = r.bool_or("output_used_in_eu", false);
        let likely_accessed_by_children = r.bool_or("likely_accessed_by_children", false);
        let integrates_with = r.opt_str("integrates_with");
        let rms_docs = r.str_list_or("rms_docs");

        let mut user_profile = None;
        for nested in r.nested("user_profile") {
            if user_profile.is_some() {
                r.error(
                    Code::DuplicateKey,
                    nested.span,
                    "duplicate `user_profile` block",
                );
                continue;
            }
            let mut ur = BlockReader::new(nested);
            ur.no_label();
            let profile = UserProfile {
                technical_knowledge: ur.req_str("technical_knowledge").unwrap_or_default(),
                experience: ur.req_str("experience").unwrap_or_default(),
                education: ur.req_str("education").unwrap_or_default(),
                training: ur.req_str("training").unwrap_or_default(),
            };
            self.diags.extend(ur.finish());
            user_profile = Some(profile);
        }

        if risk_class == RiskClass::HighRisk && annex3_category.is_empty() {
            let span = r.field_span("annex3_category").unwrap_or(block.span);
            r.error(
                Code::InvalidFieldCombination,
                span,
                "a high_risk system requires a non-empty annex3_category",
            );
        }
        self.diags.extend(r.finish());
        AiSystemProfile {
            id,
            risk_class,
            annex3_category,
            intended_purpose,
            misuses,
            placed_on_eu_market,
            output_used_in_eu,
            likely_accessed_by_children,
            user_profile,
            integrates_with,
            rms_docs,
        }
    }

    fn hazard(&mut self, block: &Block) -> Hazard {
        let mut r = BlockReader::new(block);
        let id = r.req_label().unwrap_or_default();
        let description = r.req_str("description").unwrap_or_default();
        let dimension = r
            .req_enum("dimension", Dimension::from_ident, Dimension::IDENTS)
            .unwrap_or(Dimension::Health);
        let origin = r
            .req_enum("origin", Origin::from_ident, Origin::IDENTS)
            .unwrap_or(Origin::IntendedUse);
        let knowledge = r
            .req_enum("knowledge", Knowledge::from_ident, Knowledge::IDENTS)
            .unwrap_or(Knowledge::Foreseeable);
        let severity = r
            .req_enum("severity", Severity::from_ident, Severity::IDENTS)
            .unwrap_or(Severity::Minor);
        let exposure = r.req_prob("exposure").unwrap_or(0.0);
        let occurrence = r.req_prob("occurrence").unwrap_or(0.0);
        let avoidance_failure = r.req_prob("avoidance_failure").unwrap_or(0.0);
        let methods = r.str_list_or("methods");
        let affects_children = r.bool_or("affects_children", false);
        let communicated = r.bool_or("communicated", false);

        let mut evidence = Vec::new();
        for nested in r.nested("evidence") {
            let mut er = BlockReader::new(nested);
            let reference = er.req_label().unwrap_or_default();
            let kind = er
                .req_enum("kind", EvidenceKind::from_ident, EvidenceKind::IDENTS)
                .unwrap_or(EvidenceKind::Other);
            self.diags.extend(er.finish());
            evidence.push(Evidence { kind, reference });
        }
        self.diags.extend(r.finish());
        Hazard {
            id,
            description,
            dimension,
            origin,
            knowledge,
            severity,
            exposure,
            occurrence,
            avoidance_failure,
            evidence,
            methods,
            affects_children,
            communicated,
            span: block.span,
        }
    }

    fn measure(&mut self, block: &Block) -> (Measure, Span, Span) {
        let mut r = BlockReader::new(block);
        let id = r.req_label().unwrap_or_default();
        let class = r
            .req_enum("class", MeasureClass::from_ident, MeasureClass::IDENTS)
            .unwrap_or(MeasureClass::Control);
        let targets = r.req_str_list("targets");
        let targets_span = r.field_span("targets").unwrap_or(block.span);

        // each class acts on a fixed set of probability channels
        let default_channel = match class {
            MeasureClass::Design | MeasureClass::Control => Channel::Occurrence,
            MeasureClass::Information => Channel::Avoidance,
        };
        let channel = r
            .enum_or("channel", Channel::from_ident, Channel::IDENTS)
            .unwrap_or(default_channel);
        let permitted: &[Channel] = match class {
            MeasureClass::Design => &[Channel::Occurrence],
            MeasureClass::Control => &[Channel::Exposure, Channel::Occurrence],
            MeasureClass::Information => &[Channel::Avoidance],
        };
        if !permitted.contains(&channel) {
            let span = r.field_span("channel").unwrap_or(block.span);
            r.error(
                Code::InvalidFieldCombination,
                span,
                format!("channel `{channel}` is not permitted for class `{class}`"),
            );
        }

        let factor = r.factor_or("factor", 1.0);
        let eliminate = r.bool_or("eliminate", false);
        if eliminate && class != MeasureClass::Design {
            let span = r.field_span("eliminate").unwrap_or(block.span);
            r.error(
                Code::InvalidFieldCombination,
                span,
                "eliminate is permitted only for design measures",
            );
        }
        let adopt_order = r.req_posint("adopt_order").unwrap_or(1);
        let order_span = r.field_span("adopt_order").unwrap_or(block.span);
        let status = r
            .enum_or("status", MeasureStatus::from_ident, MeasureStatus::IDENTS)
            .unwrap_or(MeasureStatus::Planned);
        self.diags.extend(r.finish());
        (
            Measure {
                id,
                class,
                targets,
                channel,
                factor,
                eliminate,
                adopt_order,
                status,
                span: block.span,
            },
            targets_span,
            order_span,
        )
    }

    fn test(&mut self, block: &Block) -> TestRecord {
        let mut r = BlockReader::new(block);
        let id = r.req_label().unwrap_or_default();
        let metric = r.req_str("metric").unwrap_or_default();
        let threshold = r.req_number("threshold").unwrap_or(0.0);
        let declared_at = r.req_date("declared_at").unwrap_or_default();
        let executed_at = r.req_date("executed_at").unwrap_or_default();
        let stage = r
            .req_enum("stage", Stage::from_ident, Stage::IDENTS)
            .unwrap_or(Stage::Development);
        let result = r.req_number("result").unwrap_or(0.0);
        let purpose = r
            .req_enum("purpose", TestPurpose::from_ident, TestPurpose::IDENTS)
            .unwrap_or(TestPurpose::Consistency);
        self.diags.extend(r.finish());
        TestRecord {
            id,
            metric,
            threshold,
            declared_at,
            executed_at,
            stage,
            result,
            purpose,
            span: block.span,
        }
    }

    fn iteration(&mut self, block: &Block) -> IterationRecord {
        let mut r = BlockReader::new(block);
        r.no_label();
        let stage = r
            .req_enum("stage", Stage::from_ident, Stage::IDENTS)
            .unwrap_or(Stage::Development);
        let date = r.req_date("date").unwrap_or_default();
        let outcome = r
            .req_enum(
                "outcome",
                IterationOutcome::from_ident,
                IterationOutcome::IDENTS,
            )
            .unwrap_or(IterationOutcome::Acceptable);
        self.diags.extend(r.finish());
        IterationRecord {
            stage,
            date,
            outcome,
            span: block.span,
        }
    }

    fn review(&mut self, block: &Block) -> ReviewRecord {
        let mut r = BlockReader::new(block);
        r.no_label();
        let date = r.req_date("date").unwrap_or_default();
        let note = r.req_str("note").unwrap_or_default();
        self.diags.extend(r.finish());
        ReviewRecord {
            date,
            note,
            span: block.span,
        }
    }

    fn children_assessment(&mut self, block: &Block) -> ChildrenAssessment {
        let mut r = BlockReader::new(block);
        r.no_label();
        let date = r.req_date("date").unwrap_or_default();
        let summary = r.req_str("summary").unwrap_or_default();
        self.diags.extend(r.finish());
        ChildrenAssessment {
            date,
            summary,
            span: block.span,
        }
    }
}

// Placeholders are only constructed on the error path, where the register
// is discarded in favour of the collected diagnostics.
fn placeholder_provider() -> Provider {
    Provider {
        name: String::new(),
        established_in: String::new(),
        is_credit_institution: false,
        is_sme: false,
        turnover_eur: 0,
        public_authority_exempt: false,
    }
}

fn placeholder_system() -> AiSystemProfile {
    AiSystemProfile {
        id: String::new(),
        risk_class: RiskClass::Minimal,
        annex3_category: String::new(),
        intended_purpose: String::new(),
        misuses: Vec::new(),
        placed_on_eu_market: false,
        output_used_in_eu: false,
        likely_accessed_by_children: false,
        user_profile: None,
        integrates_with: None,
        rms_docs: Vec::new(),
    }
}

/// Typed access to one block's fields, tracking duplicates and unknown
/// keys. Collects its own diagnostics; `finish` hands them back.
struct BlockReader<'a> {
    block: &'a Block,
    fields: BTreeMap<&'a str, &'a Field>,
    requested: Vec<&'a str>,
    nested_consumed: Vec<&'a str>,
    diags: Vec<Diagnostic>,
}

impl<'a> BlockReader<'a> {
    fn new(block: &'a Block) -> Self {
        let mut diags = Vec::new();
        let mut fields: BTreeMap<&str, &Field> = BTreeMap::new();
        for item in &block.items {
            if let Item::Field(f) = item {
                if fields.contains_key(f.key.as_str()) {
                    diags.push(Diagnostic::new(
                        Code::DuplicateKey,
                        f.span,
                        format!("duplicate key `{}` in block `{}`", f.key, block.keyword),
                    ));
                } else {
                    fields.insert(f.key.as_str(), f);
                }
            }
        }
        BlockReader {
            block,
            fields,
            requested: Vec::new(),
            nested_consumed: Vec::new(),
            diags,
        }
    }

    fn error(&mut self, code: Code, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::new(code, span, msg));
    }

    fn req_label(&mut self) -> Option<String> {
        if self.block.label.is_none() {
            let kw = self.block.keyword.clone();
            let span = self.block.span;
            self.error(
                Code::MissingRequiredField,
                span,
                format!("block `{kw}` requires a label, e.g. {kw} \"id\" {{ ... }}"),
            );
        }
        self.block.label.clone()
    }

    fn no_label(&mut self) {
        if self.block.label.is_some() {
            let kw = self.block.keyword.clone();
            let span = self.block.span;
            self.error(
                Code::UnknownKey,
                span,
                format!("block `{kw}` does not take a label"),
            );
        }
    }

    fn take(&mut self, key: &'a str) -> Option<&'a Field> {
        self.requested.push(key);
        self.fields.get(key).copied()
    }

    fn field_span(&self, key: &str) -> Option<Span> {
        self.fields.get(key).map(|f| f.span)
    }

    fn missing(&mut self, key: &str) {
        let kw = self.block.keyword.clone();
        let span = self.block.span;
        self.error(
            Code::MissingRequiredField,
            span,
            format!("block `{kw}` is missing required field `{key}`"),
        );
    }

    fn wrong_type(&mut self, field: &Field, expected: &str) {
        let got = field.value.type_name();
        let key = field.key.clone();
        let span = field.span;
        self.error(
            Code::WrongValueType,
            span,
            format!("`{key}` expects {expected}, got {got}"),
        );
    }

    fn req_str(&mut self, key: &'a str) -> Option<String> {
        match self.take(key) {
            Some(f) => match &f.value {
                Value::Str(s) => Some(s.clone()),
                _ => {
                    self.wrong_type(f, "a string");
                    None
                }
            },
            None => {
                self.missing(key);
                None
            }
        }
    }

    fn opt_str(&mut self, key: &'a str) -> Option<String> {
        match self.take(key) {
            Some(f) => match &f.value {
                Value::Str(s) => Some(s.clone()),
                _ => {
                    self.wrong_type(f, "a string");
                    None
                }
            },
            None => None,
        }
    }

    fn str_or(&mut self, key: &'a str, default: &str) -> String {
        self.opt_str(key).unwrap_or_else(|| default.to_string())
    }

    fn opt_number(&mut self, key: &'a str) -> Option<f64> {
        match self.take(key) {
            Some(f) => match f.value {
                Value::Number(n) => Some(n),
                _ => {
                    self.wrong_type(f, "a number");
                    None
                }
            },
            None => None,
        }
    }

    fn req_number(&mut self, key: &'a str) -> Option<f64> {
        if !self.fields.contains_key(key) {
            self.requested.push(key);
            self.missing(key);
            return None;
        }
        self.opt_number(key)
    }

    fn number_or(&mut self, key: &'a str, default: f64) -> f64 {
        self.opt_number(key).unwrap_or(default)
    }

    fn check_prob(&mut self, key: &str, value: f64) -> Option<f64> {
        if (0.0..=1.0).contains(&value) {
            Some(value)
        } else {
            let span = self.field_span(key).unwrap_or(self.block.span);
            self.error(
                Code::ValueOutOfRange,
                span,
                format!("`{key}` must be a probability in [0, 1], got {value}"),
            );
            None
        }
    }

    fn req_prob(&mut self, key: &'a str) -> Option<f64> {
        let v = self.req_number(key)?;
        self.check_prob(key, v)
    }

    fn prob_or(&mut self, key: &'a str, default: f64) -> f64 {
        match self.opt_number(key) {
            Some(v) => self.check_prob(key, v).unwrap_or(default),
            None => default,
        }
    }

    fn factor_or(&mut self, key: &'a str, default: f64) -> f64 {
        match self.opt_number(key) {
            Some(v) if v > 0.0 && v <= 1.0 => v,
            Some(v) => {
                let span = self.field_span(key).unwrap_or(self.block.span);
                self.error(
                    Code::ValueOutOfRange,
                    span,
                    format!("`{key}` must be a multiplier in (0, 1], got {v}"),
                );
                default
            }
            None => default,
        }
    }

    fn to_posint(&mut self, key: &str, v: f64) -> Option<u32> {
        if v.fract() == 0.0 && (1.0..=u32::MAX as f64).contains(&v) {
            Some(v as u32)
        } else {
            let span = self.field_span(key).unwrap_or(self.block.span);
            self.error(
                Code::ValueOutOfRange,
                span,
                format!("`{key}` must be a positive integer, got {v}"),
            );
            None
        }
    }

    fn req_posint(&mut self, key: &'a str) -> Option<u32> {
        let v = self.req_number(key)?;
        self.to_posint(key, v)
    }

    fn posint_or(&mut self, key: &'a str, default: u32) -> u32 {
        match self.opt_number(key) {
            Some(v) => self.to_posint(key, v).unwrap_or(default),
            None => default,
        }
    }

    fn req_money(&mut self, key: &'a str) -> Option<u64> {
        let v = self.req_number(key)?;
        if v.fract() == 0.0 && (0.0..=u64::MAX as f64).contains(&v) {
            Some(v as u64)
        } else {
            let span = self.field_span(key).unwrap_or(self.block.span);
            self.error(
                Code::ValueOutOfRange,
                span,
                format!("`{key}` must be a non-negative whole amount in EUR, got {v}"),
            );
            None
        }
    }

    fn bool_or(&mut self, key: &'a str, default: bool) -> bool {
        match self.take(key) {
            Some(f) => match f.value {
                Value::Bool(b) => b,
                _ => {
                    self.wrong_type(f, "a bool");
                    default
                }
            },
            None => default,
        }
    }

    fn req_date(&mut self, key: &'a str) -> Option<NaiveDate> {
        if !self.fields.contains_key(key) {
            self.requested.push(key);
            self.missing(key);
            return None;
        }
        self.opt_date(key)
    }

    fn opt_date(&mut self, key: &'a str) -> Option<NaiveDate> {
        match self.take(key) {
            Some(f) => match f.value {
                Value::Date(d) => Some(d),
                _ => {
                    self.wrong_type(f, "a date (YYYY-MM-DD)");
                    None
                }
            },
            None => None,
        }
    }

    fn lower_str_list(&mut self, key: &'a str) -> Option<Vec<String>> {
        let f = self.fields.get(key).copied()?;
        match &f.value {
            Value::List(elems) => {
                let mut out = Vec::new();
                for elem in elems {
                    match elem {
                        Value::Str(s) => out.push(s.clone()),
                        other => {
                            let span = f.span;
                            let key = f.key.clone();
                            let got = other.type_name();
                            self.error(
                                Code::WrongValueType,
                                span,
                                format!("`{key}` expects a list of strings; found a {got} element"),
                            );
                        }
                    }
                }
                Some(out)
            }
            _ => {
                self.wrong_type(f, "a list of strings");
                None
            }
        }
    }

    fn str_list_or(&mut self, key: &'a str) -> Vec<String> {
        self.requested.push(key);
        self.lower_str_list(key).unwrap_or_default()
    }

    fn req_str_list(&mut self, key: &'a str) -> Vec<String> {
        self.requested.push(key);
        if !self.fields.contains_key(key) {
            self.missing(key);
            return Vec::new();
        }
        self.lower_str_list(key).unwrap_or_default()
    }

    fn enum_or<T: Copy>(
        &mut self,
        key: &'a str,
        from: fn(&str) -> Option<T>,
        idents: &'static [&'static str],
    ) -> Option<T> {
        match self.take(key) {
            Some(f) => match &f.value {
                Value::Ident(name) => match from(name) {
                    Some(v) => Some(v),
                    None => {
                        let span = f.span;
                        let key = f.key.clone();
                        let name = name.clone();
                        self.error(
                            Code::UnknownEnumValue,
                            span,
                            format!(
                                "unknown value `{name}` for `{key}`; expected one of: {}",
                                idents.join(", ")
                            ),
                        );
                        None
                    }
                },
                _ => {
                    self.wrong_type(f, "a bare identifier");
                    None
                }
            },
            None => None,
        }
    }

    fn req_enum<T: Copy>(
        &mut self,
        key: &'a str,
        from: fn(&str) -> Option<T>,
        idents: &'static [&'static str],
    ) -> Option<T> {
        if !self.fields.contains_key(key) {
            self.requested.push(key);
            self.missing(key);
            return None;
        }
        self.enum_or(key, from, idents)
    }

    /// Consumes and returns every nested block with the given keyword.
    fn nested(&mut self, keyword: &'a str) -> Vec<&'a Block> {
        self.nested_consumed.push(keyword);
        self.block
            .items
            .iter()
            .filter_map(|item| match item {
                Item::Block(b) if b.keyword == keyword => Some(b),
                _ => None,
            })
            .collect()
    }

    /// Rejects any field or nested block the schema did not ask for and
    /// returns all diagnostics collected for this block.
    fn finish(mut self) -> Vec<Diagnostic> {
        let keys: Vec<(String, Span)> = self
            .fields
            .iter()
            .filter(|(k, _)| !self.requested.contains(*k))
            .map(|(k, f)| (k.to_string(), f.span))
            .collect();
        for (key, span) in keys {
            let kw = self.block.keyword.clone();
            self.error(
                Code::UnknownKey,
                span,
                format!("unknown key `{key}` in block `{kw}`"),
            );
        }
        let unknown_blocks: Vec<(String, Span)> = self
            .block
            .items
            .iter()
            .filter_map(|item| match item {
                Item::Block(b) if !self.nested_consumed.contains(&b.keyword.as_str()) => {
                    Some((b.keyword.clone(), b.span))
                }
                _ => None,
            })
            .collect();
        for (kw, span) in unknown_blocks {
            let parent = self.block.keyword.clone();
            self.error(
                Code::UnknownKey,
                span,
                format!("unknown block `{kw}` inside `{parent}`"),
            );
        }
        self.diags
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_source;

    const MINIMAL: &str = r#"
provider "Acme" {
  established_in: "DE"
  turnover_eur: 1000000
}
policy {
}
system "sys-1" {
  risk_class: minimal
  intended_purpose: "demo"
}
"#;

    fn lower_src(src: &str) -> Result<Register, Vec<Diagnostic>> {
        lower(&parse_source(src).unwrap())
    }

    fn codes(src: &str) -> Vec<Code> {
        lower_src(src).unwrap_err().iter().map(|d| d.code).collect()
    }

    #[test]
    fn minimal_document_lowers_with_empty_collections() {
        let reg = lower_src(MINIMAL).unwrap();
        assert_eq!(reg.provider.name, "Acme");
        assert_eq!(reg.provider.turnover_eur, 1_000_000);
        assert_eq!(reg.system.id, "sys-1");
        assert!(reg.hazards.is_empty());
        assert!(reg.measures.is_empty());
        assert!(reg.children_assessment.is_none());
        // omitted policy fields take the documented defaults
        assert_eq!(reg.policy, default_policy());
    }

    #[test]
    fn out_of_range_probability_is_e103_at_field_span() {
        let src = r#"
provider "Acme" {
  established_in: "DE"
  turnover_eur: 1000000
}
policy {
}
system "sys-1" {
  risk_class: minimal
  intended_purpose: "demo"
}
hazard "h1" {
  description: "d"
  dimension: health
  origin: intended_use
  knowledge: foreseeable
  severity: minor
  exposure: 1.5
  occurrence: 0.5
  avoidance_failure: 0.5
}
"#;
        let diags = lower_src(src).unwrap_err();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, Code::ValueOutOfRange);
        // anchored at the `exposure` field, not the hazard block
        let line = src
            .lines()
            .position(|l| l.contains("exposure: 1.5"))
            .unwrap()
            + 1;
        assert_eq!(diags[0].span.line as usize, line);
        assert!(diags[0].message.contains("exposure"));
    }

    #[test]
    fn dangling_measure_target_is_e105() {
        let src = format!(
            "{MINIMAL}\nmeasure \"m1\" {{\n  class: control\n  targets: [\"ghost\"]\n  adopt_order: 1\n}}\n"
        );
        assert_eq!(codes(&src), vec![Code::DanglingMeasureTarget]);
    }

    #[test]
    fn missing_required_blocks_are_e101() {
        let diags = lower_src("").unwrap_err();
        assert_eq!(diags.len(), 3);
        assert!(diags.iter().all(|d| d.code == Code::MissingRequiredBlock));
        assert!(diags.iter().all(|d| d.span == Span::DOCUMENT_START));
    }

    #[test]
    fn duplicate_key_is_e102() {
        let src = MINIMAL.replace(
            "established_in: \"DE\"",
            "established_in: \"DE\"\n  established_in: \"FR\"",
        );
        assert_eq!(codes(&src), vec![Code::DuplicateKey]);
    }

    #[test]
    fn duplicate_singleton_block_is_e102() {
        let src = format!("{MINIMAL}\npolicy {{\n}}\n");
        assert_eq!(codes(&src), vec![Code::DuplicateKey]);
    }

    #[test]
    fn unknown_enum_value_is_e104() {
        let src = MINIMAL.replace("risk_class: minimal", "risk_class: colossal");
        assert_eq!(codes(&src), vec![Code::UnknownEnumValue]);
    }

    #[test]
    fn unknown_key_is_e109() {
        let src = MINIMAL.replace(
            "intended_purpose: \"demo\"",
            "intended_purpose: \"demo\"\n  frobnication: true",
        );
        assert_eq!(codes(&src), vec![Code::UnknownKey]);
    }

    #[test]
    fn duplicate_hazard_id_is_e106() {
        let hazard = "hazard \"h1\" {\n  description: \"d\"\n  dimension: health\n  origin: intended_use\n  knowledge: foreseeable\n  severity: minor\n  exposure: 0.1\n  occurrence: 0.1\n  avoidance_failure: 0.1\n}\n";
        let src = format!("{MINIMAL}\n{hazard}{hazard}");
        assert_eq!(codes(&src), vec![Code::DuplicateId]);
    }

    #[test]
    fn channel_class_mismatch_is_e110() {
        let src = format!(
            "{MINIMAL}\nmeasure \"m1\" {{\n  class: information\n  targets: []\n  channel: occurrence\n  adopt_order: 1\n}}\n"
        );
        assert_eq!(codes(&src), vec![Code::InvalidFieldCombination]);
    }

    #[test]
    fn eliminate_on_control_is_e110() {
        let src = format!(
            "{MINIMAL}\nmeasure \"m1\" {{\n  class: control\n  targets: []\n  eliminate: true\n  adopt_order: 1\n}}\n"
        );
        assert_eq!(codes(&src), vec![Code::InvalidFieldCombination]);
    }

    #[test]
    fn duplicate_adopt_order_is_e110() {
        let m = |id: &str| {
            format!("measure \"{id}\" {{\n  class: control\n  targets: []\n  adopt_order: 3\n}}\n")
        };
        let src = format!("{MINIMAL}\n{}{}", m("m1"), m("m2"));
        assert_eq!(codes(&src), vec![Code::InvalidFieldCombination]);
    }

    #[test]
    fn high_risk_requires_annex3_category() {
        let src = MINIMAL.replace("risk_class: minimal", "risk_class: high_risk");
        assert_eq!(codes(&src), vec![Code::InvalidFieldCombination]);
    }

    #[test]
    fn policy_ladder_violation_is_e103() {
        let src = MINIMAL.replace(
            "policy {",
            "policy {\n  threshold_minor: 0.001\n  threshold_moderate: 0.01",
        );
        let diags = lower_src(&src).unwrap_err();
        assert!(diags.iter().any(|d| d.code == Code::ValueOutOfRange));
    }

    #[test]
    fn fractional_turnover_is_e103() {
        let src = MINIMAL.replace("turnover_eur: 1000000", "turnover_eur: 1000000.5");
        assert_eq!(codes(&src), vec![Code::ValueOutOfRange]);
    }

    #[test]
    fn measure_defaults_apply() {
        let src = format!(
            "{MINIMAL}\nmeasure \"m1\" {{\n  class: information\n  targets: []\n  adopt_order: 1\n}}\n"
        );
        let reg = lower_src(&src).unwrap();
        let m = &reg.measures[0];
        assert_eq!(m.channel, Channel::Avoidance);
        assert_eq!(m.factor, 1.0);
        assert!(!m.eliminate);
        assert_eq!(m.status, MeasureStatus::Planned);
    }

    #[test]
    fn policy_overrides_apply() {
        let src = MINIMAL.replace(
            "policy {",
            "policy {\n  regime: council\n  overall_threshold: 2\n  entry_into_force: 2023-03-01",
        );
        let reg = lower_src(&src).unwrap();
        assert_eq!(reg.policy.regime, Regime::Council);
        assert_eq!(reg.policy.overall_threshold, 2.0);
        assert_eq!(
            reg.policy.entry_into_force,
            NaiveDate::from_ymd_opt(2023, 3, 1)
        );
    }

    #[test]
    fn evidence_blocks_lower_with_label_as_reference() {
        let src = format!(
            "{MINIMAL}\nhazard \"h1\" {{\n  description: \"d\"\n  dimension: health\n  origin: intended_use\n  knowledge: known\n  severity: minor\n  exposure: 0.1\n  occurrence: 0.1\n  avoidance_failure: 0.1\n  evidence \"AIID-42\" {{\n    kind: incident\n  }}\n}}\n"
        );
        let reg = lower_src(&src).unwrap();
        assert_eq!(reg.hazards[0].evidence.len(), 1);
        assert_eq!(reg.hazards[0].evidence[0].reference, "AIID-42");
        assert_eq!(reg.hazards[0].evidence[0].kind, EvidenceKind::Incident);
    }
}
