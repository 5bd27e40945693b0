//! JSON file formats: algebra/cocycle/eta/form inputs and the emitted
//! store/certificate/transformation artifacts. All coefficients are exact
//! rational strings, Novikov series as term lists `[{"T": e, "c": q}]`.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use ainfcyc::barcx::Basis;
use ainfcyc::ncgeom::{CyclicForm, Letter};
use ainfcyc::novikov::{FilteredAInfty, GappedMonoid, NovikovScalar};
use ainfcyc::signcore::BasisElement;
use ainfcyc::{HochschildCochainSeq, NegativeCyclicCochain, Rational, Scalar};

pub const SCHEMA: u32 = 1;

#[derive(Debug)]
pub struct SchemaError(pub String);

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for SchemaError {}

type Result<T> = std::result::Result<T, SchemaError>;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(SchemaError(msg.into()))
}

/// A coefficient: either a rational string or a list of Novikov terms.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Rat(String),
    Nov(Vec<NovTerm>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NovTerm {
    #[serde(rename = "T")]
    pub t: String,
    pub c: String,
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    Rational::from_str(s).map_err(|e| SchemaError(format!("bad rational {s:?}: {e}")))
}

impl Coeff {
    pub fn as_rational(&self) -> Result<Rational> {
        match self {
            Coeff::Rat(s) => parse_rational(s),
            Coeff::Nov(terms) => {
                let s = self.as_novikov(None)?;
                match s.as_rational() {
                    Some(q) => Ok(q),
                    None => err(format!(
                        "energy-carrying coefficient ({} terms) where a rational is required",
                        terms.len()
                    )),
                }
            }
        }
    }

    pub fn as_novikov(&self, cutoff: Option<Rational>) -> Result<NovikovScalar> {
        match self {
            Coeff::Rat(s) => Ok(NovikovScalar::monomial(
                Rational::from_int(0),
                parse_rational(s)?,
                cutoff,
            )),
            Coeff::Nov(terms) => {
                let mut acc = NovikovScalar::from_rational(Rational::from_int(0));
                for t in terms {
                    acc = acc
                        + NovikovScalar::monomial(
                            parse_rational(&t.t)?,
                            parse_rational(&t.c)?,
                            cutoff.clone(),
                        );
                }
                Ok(acc)
            }
        }
    }

    /// Canonical serialization: plain rational when the scalar is one.
    pub fn from_novikov(s: &NovikovScalar) -> Coeff {
        match s.as_rational() {
            Some(q) => Coeff::Rat(q.to_string()),
            None => Coeff::Nov(
                s.terms()
                    .map(|(e, c)| NovTerm { t: e.to_string(), c: c.to_string() })
                    .collect(),
            ),
        }
    }

    pub fn from_rational(q: &Rational) -> Coeff {
        Coeff::Rat(q.to_string())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisEntry {
    pub id: String,
    pub degree: i64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unit: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BetaEntry {
    pub energy: String,
    pub maslov: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutEntry {
    pub id: String,
    pub c: Coeff,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OpEntry {
    pub inputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<BetaEntry>,
    pub outputs: Vec<OutEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonoidEntry {
    pub generators: Vec<BetaEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Truncation {
    pub order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<String>,
}

/// The algebra definition file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub schema: u32,
    pub basis: Vec<BasisEntry>,
    #[serde(default)]
    pub ops: Vec<OpEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairing: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monoid: Option<MonoidEntry>,
    pub truncation: Truncation,
}

/// Cocycle file for the tilde command: column sequence of cochains.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CocycleFile {
    pub schema: u32,
    pub columns: Vec<Vec<CochainTerm>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CochainTerm {
    pub inputs: Vec<String>,
    pub out: String,
    pub c: Coeff,
}

/// Perturbation cochain file for the equivalence command.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EtaFile {
    pub schema: u32,
    pub terms: Vec<CochainTerm>,
}

/// Cyclic form file for the darboux command: carries its own basis so it
/// is self-contained, plus an optional monoid for the filtered branch.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FormFile {
    pub schema: u32,
    pub basis: Vec<BasisEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monoid: Option<MonoidEntry>,
    pub truncation: Truncation,
    pub terms: Vec<FormTerm>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FormTerm {
    pub word: Vec<String>,
    pub c: Coeff,
}

/// Emitted bimodule map store.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StoreFile {
    pub schema: u32,
    pub entries: Vec<StoreEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StoreEntry {
    pub left: Vec<String>,
    pub center: String,
    pub right: Vec<String>,
    pub out: String,
    pub c: Coeff,
}

/// Emitted cohomomorphism (equivalence certificate / darboux transform).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapFile {
    pub schema: u32,
    pub components: Vec<MapComponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<Vec<Vec<Coeff>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<StepEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapComponent {
    pub inputs: Vec<String>,
    pub outputs: Vec<OutEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepEntry {
    pub level: usize,
    pub field: Vec<FieldTerm>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldTerm {
    pub component: String,
    pub word: Vec<String>,
    pub c: Coeff,
}

pub fn check_schema(schema: u32) -> Result<()> {
    if schema != SCHEMA {
        return err(format!("unsupported schema version {schema} (expected {SCHEMA})"));
    }
    Ok(())
}

pub fn basis_from_entries(entries: &[BasisEntry]) -> Result<Basis> {
    let mut v = Vec::new();
    let mut seen = BTreeMap::new();
    for e in entries {
        if seen.insert(e.id.clone(), ()).is_some() {
            return err(format!("duplicate basis id {:?}", e.id));
        }
        v.push(if e.unit {
            BasisElement::unit(&e.id, e.degree)
        } else {
            BasisElement::new(&e.id, e.degree)
        });
    }
    Basis::new(v).map_err(|e| SchemaError(e.to_string()))
}

pub fn resolve(basis: &Basis, id: &str) -> Result<usize> {
    basis
        .index_of(id)
        .ok_or_else(|| SchemaError(format!("unknown basis id {id:?}")))
}

pub fn resolve_word(basis: &Basis, ids: &[String]) -> Result<Vec<usize>> {
    ids.iter().map(|i| resolve(basis, i)).collect()
}

pub fn parse_beta(b: &BetaEntry) -> Result<(Rational, i64)> {
    Ok((parse_rational(&b.energy)?, b.maslov))
}

pub fn parse_letter(basis: &Basis, s: &str) -> Result<Letter> {
    if let Some(id) = s.strip_prefix("dx:") {
        return Ok(Letter::dx(resolve(basis, id)?));
    }
    if let Some(id) = s.strip_prefix("x:") {
        return Ok(Letter::x(resolve(basis, id)?));
    }
    err(format!("bad letter {s:?} (expected \"x:<id>\" or \"dx:<id>\")"))
}

pub fn letter_to_string(basis: &Basis, l: &Letter) -> String {
    let prefix = if l.kind == ainfcyc::ncgeom::Kind::Dx { "dx" } else { "x" };
    format!("{prefix}:{}", basis.id(l.index))
}

pub fn pairing_matrix(basis: &Basis, rows: &[Vec<String>]) -> Result<Vec<Vec<Rational>>> {
    let n = basis.len();
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return err(format!("pairing must be a {n} x {n} matrix"));
    }
    rows.iter()
        .map(|r| r.iter().map(|s| parse_rational(s)).collect())
        .collect()
}

/// A parsed algebra: the filtered route is taken when a monoid or any
/// energy tag is present.
pub enum AlgebraInput {
    Plain(ainfcyc::QAInfty, Option<Vec<Vec<Rational>>>),
    Filtered(FilteredAInfty, Option<Vec<Vec<Rational>>>),
}

impl AlgebraInput {
    pub fn pairing(&self) -> Option<&Vec<Vec<Rational>>> {
        match self {
            AlgebraInput::Plain(_, p) | AlgebraInput::Filtered(_, p) => p.as_ref(),
        }
    }
}

pub fn algebra_from_file(
    f: &AlgebraFile,
    order_override: Option<usize>,
    cutoff_override: Option<&Rational>,
) -> Result<AlgebraInput> {
    check_schema(f.schema)?;
    let basis = basis_from_entries(&f.basis)?;
    let order = order_override.unwrap_or(f.truncation.order);
    let pairing = match &f.pairing {
        Some(rows) => Some(pairing_matrix(&basis, rows)?),
        None => None,
    };
    let filtered = f.monoid.is_some() || f.ops.iter().any(|o| o.beta.is_some());
    if !filtered {
        let mut a = ainfcyc::QAInfty::new(basis.clone(), order);
        for op in &f.ops {
            let inputs = resolve_word(&basis, &op.inputs)?;
            let outputs: Vec<(usize, Rational)> = op
                .outputs
                .iter()
                .map(|o| Ok((resolve(&basis, &o.id)?, o.c.as_rational()?)))
                .collect::<Result<_>>()?;
            a.add_op(&inputs, &outputs).map_err(|e| {
                SchemaError(format!("op m({:?}): {e}", op.inputs))
            })?;
        }
        return Ok(AlgebraInput::Plain(a, pairing));
    }
    let cutoff = match (cutoff_override, &f.truncation.energy) {
        (Some(c), _) => c.clone(),
        (None, Some(s)) => parse_rational(s)?,
        (None, None) => {
            return err("filtered algebra needs an energy cutoff (truncation.energy or --energy-cutoff)")
        }
    };
    let generators = match &f.monoid {
        Some(m) => m.generators.iter().map(parse_beta).collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    let monoid = GappedMonoid::new(generators, cutoff);
    let mut a = FilteredAInfty::new(basis.clone(), monoid, order);
    for op in &f.ops {
        let inputs = resolve_word(&basis, &op.inputs)?;
        let beta = match &op.beta {
            Some(b) => parse_beta(b)?,
            None => (Rational::from_int(0), 0),
        };
        let outputs: Vec<(usize, Rational)> = op
            .outputs
            .iter()
            .map(|o| Ok((resolve(&basis, &o.id)?, o.c.as_rational()?)))
            .collect::<Result<_>>()?;
        a.add_op(&inputs, beta, &outputs)
            .map_err(|e| SchemaError(format!("op m({:?}): {e}", op.inputs)))?;
    }
    Ok(AlgebraInput::Filtered(a, pairing))
}

pub fn cocycle_from_file(
    f: &CocycleFile,
    basis: &Basis,
    order: usize,
) -> Result<NegativeCyclicCochain<Rational>> {
    check_schema(f.schema)?;
    if f.columns.is_empty() {
        return err("cocycle file needs at least one column");
    }
    let mut phi = NegativeCyclicCochain::zero(f.columns.len(), order);
    for (i, col) in f.columns.iter().enumerate() {
        for t in col {
            let inputs = resolve_word(basis, &t.inputs)?;
            let out = resolve(basis, &t.out)?;
            phi.columns[i].add_term(&inputs, out, t.c.as_rational()?);
        }
    }
    Ok(phi)
}

pub fn eta_from_file_plain(
    f: &EtaFile,
    basis: &Basis,
    order: usize,
) -> Result<HochschildCochainSeq<Rational>> {
    check_schema(f.schema)?;
    let mut eta = HochschildCochainSeq::zero(order);
    for t in &f.terms {
        let inputs = resolve_word(basis, &t.inputs)?;
        let out = resolve(basis, &t.out)?;
        eta.add_term(&inputs, out, t.c.as_rational()?);
    }
    Ok(eta)
}

pub fn eta_from_file_filtered(
    f: &EtaFile,
    basis: &Basis,
    order: usize,
    cutoff: &Rational,
) -> Result<HochschildCochainSeq<NovikovScalar>> {
    check_schema(f.schema)?;
    let mut eta = HochschildCochainSeq::zero(order);
    for t in &f.terms {
        let inputs = resolve_word(basis, &t.inputs)?;
        let out = resolve(basis, &t.out)?;
        eta.add_term(&inputs, out, t.c.as_novikov(Some(cutoff.clone()))?);
    }
    Ok(eta)
}

pub fn form_from_file_plain(f: &FormFile, basis: &Basis) -> Result<CyclicForm<Rational>> {
    let mut form = CyclicForm::zero(f.truncation.order);
    for t in &f.terms {
        let word: Vec<Letter> =
            t.word.iter().map(|s| parse_letter(basis, s)).collect::<Result<_>>()?;
        form.add_word(basis, word, t.c.as_rational()?)
            .map_err(|e| SchemaError(e.to_string()))?;
    }
    Ok(form)
}

pub fn form_from_file_filtered(
    f: &FormFile,
    basis: &Basis,
    cutoff: &Rational,
) -> Result<CyclicForm<NovikovScalar>> {
    let mut form = CyclicForm::zero(f.truncation.order);
    for t in &f.terms {
        let word: Vec<Letter> =
            t.word.iter().map(|s| parse_letter(basis, s)).collect::<Result<_>>()?;
        form.add_word(basis, word, t.c.as_novikov(Some(cutoff.clone()))?)
            .map_err(|e| SchemaError(e.to_string()))?;
    }
    Ok(form)
}
