//! Molecular structure data: rovibrational levels, z-polarized transition
//! dipoles and the parity bookkeeping needed by the selection rules.
//!
//! Data files are TOML with three sections:
//!
//! ```toml
//! [meta]
//! name = "three-level test model"
//! mass = { value = 28.0134, unit = "u" }
//! rotational_constant = { value = 1.9896, unit = "cm-1" }
//! ground_label = "X"
//! parity = { X = "(-1)^J", A = "(-1)^J" }
//!
//! [states]
//! records = [
//!   { id = "g", label = "X", nu = 0, J = 0, M = 0, energy = 0.0, unit = "cm-1" },
//!   { id = "a", label = "A", nu = 0, J = 1, M = 0, energy = 100000.0, unit = "cm-1" },
//! ]
//!
//! [dipoles]
//! records = [
//!   { a = "g", b = "a", value = 1.0, unit = "D" },
//! ]
//! ```
//!
//! Every quantity carries its own unit. Unknown keys are rejected. Parity of a
//! state is `rule(label) · (-1)^J`, where the rule is one of `(-1)^J`,
//! `-(-1)^J` or `(-1)^(J+1)`. Dipole records must join opposite-parity
//! states with |ΔJ| = 1 and ΔM = 0.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::ops::Range;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::{Error, Result};
use crate::units::{convert_unit, Dimension, Unit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn from_sign(sign: i32) -> Self {
        if sign > 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => f.write_str("even"),
            Parity::Odd => f.write_str("odd"),
        }
    }
}

/// Parity convention of one electronic manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParityRule {
    /// parity = (-1)^J
    SignJ,
    /// parity = -(-1)^J
    MinusSignJ,
}

impl ParityRule {
    pub fn parity(self, j: u32) -> Parity {
        let base = if j.is_multiple_of(2) { 1 } else { -1 };
        match self {
            ParityRule::SignJ => Parity::from_sign(base),
            ParityRule::MinusSignJ => Parity::from_sign(-base),
        }
    }

    fn parse(s: &str) -> Option<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match compact.as_str() {
            "(-1)^J" => Some(ParityRule::SignJ),
            "-(-1)^J" | "(-1)^(J+1)" => Some(ParityRule::MinusSignJ),
            _ => None,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            ParityRule::SignJ => "(-1)^J",
            ParityRule::MinusSignJ => "-(-1)^J",
        }
    }
}

/// One rovibrational level |label; ν, J, M⟩.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoVibState {
    pub id: String,
    pub label: String,
    pub nu: u32,
    pub j: u32,
    pub m: i32,
    /// Level energy in joules.
    pub energy: f64,
    pub parity: Parity,
}

impl RoVibState {
    pub fn quantum_numbers(&self) -> (u32, u32, i32) {
        (self.nu, self.j, self.m)
    }
}

/// Real z-polarized transition dipoles μᶻ_ij = μᶻ_ji (C m), keyed by the
/// ordered state-index pair (low, high).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TransitionDipoleTable {
    entries: BTreeMap<(usize, usize), f64>,
    neighbours: Vec<Vec<(usize, f64)>>,
}

impl TransitionDipoleTable {
    fn new(n_states: usize) -> Self {
        TransitionDipoleTable {
            entries: BTreeMap::new(),
            neighbours: vec![Vec::new(); n_states],
        }
    }

    fn insert(&mut self, a: usize, b: usize, value: f64) -> bool {
        let key = (a.min(b), a.max(b));
        if self.entries.insert(key, value).is_some() {
            return false;
        }
        self.neighbours[a].push((b, value));
        self.neighbours[b].push((a, value));
        true
    }

    /// μᶻ between two states, zero when no entry exists.
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries
            .get(&(a.min(b), a.max(b)))
            .copied()
            .unwrap_or(0.0)
    }

    /// States coupled to `state`, with their dipole values.
    pub fn coupled(&self, state: usize) -> &[(usize, f64)] {
        &self.neighbours[state]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }
}

/// Immutable molecular model. Energies, dipoles and mass are SI.
#[derive(Debug, Clone, PartialEq)]
pub struct MoleculeModel {
    pub name: String,
    states: Vec<RoVibState>,
    index: HashMap<String, usize>,
    dipoles: TransitionDipoleTable,
    mass: f64,
    rotational_constant: f64,
    ground_label: String,
    parity_rules: BTreeMap<String, ParityRule>,
}

impl MoleculeModel {
    pub fn states(&self) -> &[RoVibState] {
        &self.states
    }

    pub fn state(&self, index: usize) -> &RoVibState {
        &self.states[index]
    }

    pub fn state_index(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownState(id.to_string()))
    }

    pub fn dipoles(&self) -> &TransitionDipoleTable {
        &self.dipoles
    }

    /// Mass in kilograms.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Rotational constant as an energy (J).
    pub fn rotational_constant(&self) -> f64 {
        self.rotational_constant
    }

    /// Rotational constant in cm⁻¹.
    pub fn rotational_constant_cm(&self) -> f64 {
        convert_unit(self.rotational_constant, Unit::Joule, Unit::Wavenumber)
            .expect("energy units")
    }

    pub fn ground_label(&self) -> &str {
        &self.ground_label
    }

    pub fn is_ground(&self, index: usize) -> bool {
        self.states[index].label == self.ground_label
    }

    pub fn ground_states(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.states.len()).filter(move |&i| self.is_ground(i))
    }

    /// Index of the ground-manifold state |ν, J, M⟩.
    pub fn ground_state(&self, nu: u32, j: u32, m: i32) -> Result<usize> {
        self.ground_states()
            .find(|&i| self.states[i].quantum_numbers() == (nu, j, m))
            .ok_or_else(|| {
                Error::UnknownState(format!("{}(nu={nu}, J={j}, M={m})", self.ground_label))
            })
    }

    /// Stable textual rendering of the whole model; equal models render to
    /// identical bytes.
    pub fn canonical_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "name={:?}", self.name);
        let _ = writeln!(out, "mass={:e}", self.mass);
        let _ = writeln!(out, "rotational_constant={:e}", self.rotational_constant);
        let _ = writeln!(out, "ground_label={:?}", self.ground_label);
        for (label, rule) in &self.parity_rules {
            let _ = writeln!(out, "parity {label:?}={}", rule.as_str());
        }
        for s in &self.states {
            let _ = writeln!(
                out,
                "state {:?} {:?} {} {} {} {:e} {}",
                s.id, s.label, s.nu, s.j, s.m, s.energy, s.parity
            );
        }
        for ((a, b), v) in self.dipoles.iter() {
            let _ = writeln!(out, "dipole {a} {b} {v:e}");
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Document schema

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    meta: MetaSection,
    states: StatesSection,
    dipoles: DipolesSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Quantity {
    value: f64,
    unit: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaSection {
    #[serde(default)]
    name: String,
    mass: Spanned<Quantity>,
    rotational_constant: Spanned<Quantity>,
    ground_label: String,
    parity: BTreeMap<String, Spanned<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StatesSection {
    records: Vec<Spanned<StateRecord>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateRecord {
    id: String,
    label: String,
    nu: u32,
    #[serde(rename = "J")]
    j: u32,
    #[serde(rename = "M")]
    m: i32,
    energy: f64,
    unit: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DipolesSection {
    records: Vec<Spanned<DipoleRecord>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DipoleRecord {
    a: String,
    b: String,
    value: f64,
    unit: String,
}

/// Maps byte offsets to 1-based line/column pairs.
struct LineIndex {
    starts: Vec<usize>,
}

impl LineIndex {
    fn new(text: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        LineIndex { starts }
    }

    fn locate(&self, offset: usize) -> (usize, usize) {
        let line = self.starts.partition_point(|&s| s <= offset);
        let column = offset - self.starts[line - 1] + 1;
        (line, column)
    }

    fn record(&self, kind: &str, span: Range<usize>) -> String {
        let (line, _) = self.locate(span.start);
        format!("{kind} at line {line}")
    }
}

fn quantity(
    lines: &LineIndex,
    q: &Spanned<Quantity>,
    field: &'static str,
    dimension: Dimension,
    target: Unit,
) -> Result<f64> {
    let record = lines.record("[meta]", q.span());
    let unit = parse_unit(&q.get_ref().unit, &record, field, dimension)?;
    let value = q.get_ref().value;
    if !value.is_finite() {
        return Err(Error::Field {
            record,
            field,
            message: "value must be finite".into(),
        });
    }
    convert_unit(value, unit, target)
}

fn parse_unit(tag: &str, record: &str, field: &'static str, dimension: Dimension) -> Result<Unit> {
    let unit: Unit = tag.parse().map_err(|_| Error::Field {
        record: record.to_string(),
        field,
        message: format!("unknown unit `{tag}`"),
    })?;
    if unit.dimension() != dimension {
        return Err(Error::Field {
            record: record.to_string(),
            field,
            message: format!("unit `{tag}` has the wrong dimension"),
        });
    }
    Ok(unit)
}

/// Parse and validate a molecular data document.
pub fn load_molecule(source: &str) -> Result<MoleculeModel> {
    let lines = LineIndex::new(source);
    let doc: Document = toml::from_str(source).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|s| lines.locate(s.start))
            .unwrap_or((0, 0));
        Error::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;

    let mass = quantity(&lines, &doc.meta.mass, "mass", Dimension::Mass, Unit::Kilogram)?;
    if mass <= 0.0 {
        return Err(Error::Field {
            record: lines.record("[meta]", doc.meta.mass.span()),
            field: "mass",
            message: "mass must be positive".into(),
        });
    }
    let rotational_constant = quantity(
        &lines,
        &doc.meta.rotational_constant,
        "rotational_constant",
        Dimension::Energy,
        Unit::Joule,
    )?;

    let mut parity_rules = BTreeMap::new();
    for (label, rule) in &doc.meta.parity {
        let parsed = ParityRule::parse(rule.get_ref()).ok_or_else(|| Error::Field {
            record: lines.record("[meta]", rule.span()),
            field: "parity",
            message: format!(
                "unknown parity rule `{}` (expected `(-1)^J` or `-(-1)^J`)",
                rule.get_ref()
            ),
        })?;
        parity_rules.insert(label.clone(), parsed);
    }

    let mut states = Vec::with_capacity(doc.states.records.len());
    let mut index = HashMap::with_capacity(doc.states.records.len());
    for spanned in &doc.states.records {
        let rec = spanned.get_ref();
        let record = lines.record("state", spanned.span());
        let unit = parse_unit(&rec.unit, &record, "unit", Dimension::Energy)?;
        if rec.m.unsigned_abs() > rec.j {
            return Err(Error::Field {
                record,
                field: "M",
                message: format!("|M| = {} exceeds J = {}", rec.m.abs(), rec.j),
            });
        }
        if !rec.energy.is_finite() {
            return Err(Error::Field {
                record,
                field: "energy",
                message: "energy must be finite".into(),
            });
        }
        let rule = parity_rules.get(&rec.label).ok_or_else(|| Error::Field {
            record: record.clone(),
            field: "label",
            message: format!("no parity rule declared for label `{}`", rec.label),
        })?;
        if index.insert(rec.id.clone(), states.len()).is_some() {
            return Err(Error::Field {
                record,
                field: "id",
                message: format!("duplicate state id `{}`", rec.id),
            });
        }
        states.push(RoVibState {
            id: rec.id.clone(),
            label: rec.label.clone(),
            nu: rec.nu,
            j: rec.j,
            m: rec.m,
            energy: convert_unit(rec.energy, unit, Unit::Joule)?,
            parity: rule.parity(rec.j),
        });
    }

    if !states.iter().any(|s| s.label == doc.meta.ground_label) {
        return Err(Error::Field {
            record: "[meta]".into(),
            field: "ground_label",
            message: format!("no states carry ground label `{}`", doc.meta.ground_label),
        });
    }
    check_ladders(&states)?;

    let mut dipoles = TransitionDipoleTable::new(states.len());
    for spanned in &doc.dipoles.records {
        let rec = spanned.get_ref();
        let record = lines.record("dipole", spanned.span());
        let unit = parse_unit(&rec.unit, &record, "unit", Dimension::DipoleMoment)?;
        let lookup = |id: &str, field: &'static str| {
            index.get(id).copied().ok_or_else(|| Error::Field {
                record: record.clone(),
                field,
                message: format!("unknown state `{id}`"),
            })
        };
        let a = lookup(&rec.a, "a")?;
        let b = lookup(&rec.b, "b")?;
        if !rec.value.is_finite() {
            return Err(Error::Field {
                record,
                field: "value",
                message: "dipole must be finite".into(),
            });
        }
        if let Some(rule) = dipole_rule_violation(&states[a], &states[b]) {
            return Err(Error::SelectionRule {
                record,
                a: rec.a.clone(),
                b: rec.b.clone(),
                rule,
            });
        }
        let value = convert_unit(rec.value, unit, Unit::CoulombMeter)?;
        if !dipoles.insert(a, b, value) {
            return Err(Error::Field {
                record,
                field: "a",
                message: format!("duplicate dipole entry for `{}`/`{}`", rec.a, rec.b),
            });
        }
    }

    Ok(MoleculeModel {
        name: doc.meta.name,
        states,
        index,
        dipoles,
        mass,
        rotational_constant,
        ground_label: doc.meta.ground_label,
        parity_rules,
    })
}

/// Energies within one (label, ν, M) ladder must rise with J.
fn check_ladders(states: &[RoVibState]) -> Result<()> {
    type Ladder<'a> = Vec<(u32, f64, &'a str)>;
    let mut ladders: BTreeMap<(&str, u32, i32), Ladder> = BTreeMap::new();
    for s in states {
        ladders
            .entry((s.label.as_str(), s.nu, s.m))
            .or_default()
            .push((s.j, s.energy, s.id.as_str()));
    }
    for ((label, nu, _), mut rungs) in ladders {
        rungs.sort_by_key(|r| r.0);
        for pair in rungs.windows(2) {
            if pair[1].0 > pair[0].0 && pair[1].1 <= pair[0].1 {
                return Err(Error::Field {
                    record: format!("state `{}`", pair[1].2),
                    field: "energy",
                    message: format!(
                        "energy does not increase with J in the {label} nu={nu} ladder"
                    ),
                });
            }
        }
    }
    Ok(())
}

const RULE_PARITY: &str = "electric-dipole rule: states must have opposite parity";
const RULE_DELTA_J: &str = "electric-dipole rule: |ΔJ| must equal 1";
const RULE_DELTA_M: &str = "z-polarized dipole rule: ΔM must equal 0";

fn dipole_rule_violation(a: &RoVibState, b: &RoVibState) -> Option<&'static str> {
    if a.parity == b.parity {
        Some(RULE_PARITY)
    } else if a.j.abs_diff(b.j) != 1 {
        Some(RULE_DELTA_J)
    } else if a.m != b.m {
        Some(RULE_DELTA_M)
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Programmatic construction

/// Builds models in code (tests, synthetic fixtures). Selection rules are not
/// enforced here; run [`validate_transitions`] on the result.
#[derive(Debug, Clone)]
pub struct MoleculeBuilder {
    name: String,
    mass: f64,
    rotational_constant: f64,
    ground_label: String,
    parity_rules: BTreeMap<String, ParityRule>,
    states: Vec<RoVibState>,
    dipoles: Vec<(String, String, f64)>,
}

impl MoleculeBuilder {
    /// `mass` in kg, `rotational_constant_cm` in cm⁻¹.
    pub fn new(name: &str, mass: f64, rotational_constant_cm: f64, ground_label: &str) -> Self {
        MoleculeBuilder {
            name: name.to_string(),
            mass,
            rotational_constant: convert_unit(rotational_constant_cm, Unit::Wavenumber, Unit::Joule)
                .expect("energy units"),
            ground_label: ground_label.to_string(),
            parity_rules: BTreeMap::new(),
            states: Vec::new(),
            dipoles: Vec::new(),
        }
    }

    pub fn parity_rule(mut self, label: &str, rule: ParityRule) -> Self {
        self.parity_rules.insert(label.to_string(), rule);
        self
    }

    /// Add a state with its energy in cm⁻¹.
    pub fn state(mut self, id: &str, label: &str, nu: u32, j: u32, m: i32, energy_cm: f64) -> Self {
        let rule = self
            .parity_rules
            .get(label)
            .copied()
            .unwrap_or(ParityRule::SignJ);
        self.states.push(RoVibState {
            id: id.to_string(),
            label: label.to_string(),
            nu,
            j,
            m,
            energy: convert_unit(energy_cm, Unit::Wavenumber, Unit::Joule).expect("energy units"),
            parity: rule.parity(j),
        });
        self
    }

    /// Add a dipole entry in debye.
    pub fn dipole(mut self, a: &str, b: &str, debye: f64) -> Self {
        self.dipoles.push((a.to_string(), b.to_string(), debye));
        self
    }

    pub fn build(self) -> Result<MoleculeModel> {
        if self.mass <= 0.0 {
            return Err(Error::invalid("mass", "must be positive"));
        }
        let mut index = HashMap::new();
        for (i, s) in self.states.iter().enumerate() {
            if index.insert(s.id.clone(), i).is_some() {
                return Err(Error::invalid("state", format!("duplicate id `{}`", s.id)));
            }
        }
        let mut dipoles = TransitionDipoleTable::new(self.states.len());
        for (a, b, d) in &self.dipoles {
            let ia = *index.get(a).ok_or_else(|| Error::UnknownState(a.clone()))?;
            let ib = *index.get(b).ok_or_else(|| Error::UnknownState(b.clone()))?;
            let value = convert_unit(*d, Unit::Debye, Unit::CoulombMeter)?;
            if !dipoles.insert(ia, ib, value) {
                return Err(Error::invalid("dipole", format!("duplicate entry {a}/{b}")));
            }
        }
        Ok(MoleculeModel {
            name: self.name,
            states: self.states,
            index,
            dipoles,
            mass: self.mass,
            rotational_constant: self.rotational_constant,
            ground_label: self.ground_label,
            parity_rules: self.parity_rules,
        })
    }
}

// ---------------------------------------------------------------------------
// Validation report

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleViolation {
    pub a: String,
    pub b: String,
    pub rule: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairEligibility {
    InterferenceEligible,
    OppositeParity,
    DeltaJNotTwo,
    DeltaMNonZero,
}

impl fmt::Display for PairEligibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairEligibility::InterferenceEligible => f.write_str("interference-eligible"),
            PairEligibility::OppositeParity => {
                f.write_str("interference-ineligible (opposite parity)")
            }
            PairEligibility::DeltaJNotTwo => f.write_str("interference-ineligible (|ΔJ| != 2)"),
            PairEligibility::DeltaMNonZero => f.write_str("interference-ineligible (ΔM != 0)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroundPair {
    pub a: String,
    pub b: String,
    pub eligibility: PairEligibility,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<RuleViolation>,
    pub ground_pairs: Vec<GroundPair>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Classify a pair of ground-manifold states for interference use: same
/// parity, J₂ = J₁ + 2 and M₁ = M₂.
pub fn assess_pair(a: &RoVibState, b: &RoVibState) -> PairEligibility {
    if a.parity != b.parity {
        PairEligibility::OppositeParity
    } else if a.m != b.m {
        PairEligibility::DeltaMNonZero
    } else if a.j.abs_diff(b.j) != 2 {
        PairEligibility::DeltaJNotTwo
    } else {
        PairEligibility::InterferenceEligible
    }
}

/// Check every dipole entry against the selection rules and classify ground
/// pairs with equal M and 1 ≤ |ΔJ| ≤ 2.
pub fn validate_transitions(model: &MoleculeModel) -> ValidationReport {
    let mut report = ValidationReport::default();
    for ((a, b), _) in model.dipoles.iter() {
        if let Some(rule) = dipole_rule_violation(&model.states[a], &model.states[b]) {
            report.violations.push(RuleViolation {
                a: model.states[a].id.clone(),
                b: model.states[b].id.clone(),
                rule,
            });
        }
    }
    let ground: Vec<usize> = model.ground_states().collect();
    for (n, &a) in ground.iter().enumerate() {
        for &b in &ground[n + 1..] {
            let (sa, sb) = (&model.states[a], &model.states[b]);
            let dj = sa.j.abs_diff(sb.j);
            if sa.m == sb.m && (1..=2).contains(&dj) {
                let (lo, hi) = if sa.j <= sb.j { (sa, sb) } else { (sb, sa) };
                report.ground_pairs.push(GroundPair {
                    a: lo.id.clone(),
                    b: hi.id.clone(),
                    eligibility: assess_pair(lo, hi),
                });
            }
        }
    }
    report
}
